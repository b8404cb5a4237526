from django.apps import AppConfig


class StatespaceConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.statespace'
    verbose_name = 'Espaço de estados'
