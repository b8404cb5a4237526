from django.apps import AppConfig


class KingmanConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.kingman'
    verbose_name = 'Núcleo de Kingman'
