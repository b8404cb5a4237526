from django.apps import AppConfig


class PhasetypeConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.phasetype'
    verbose_name = 'Distribuições phase-type discretas'
