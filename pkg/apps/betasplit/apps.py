from django.apps import AppConfig


class BetasplitConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.betasplit'
    verbose_name = 'Modelo beta-splitting'
