from django.apps import AppConfig


class FrechetConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.frechet'
    verbose_name = 'Médias de Fréchet'
