from django.apps import AppConfig


class FmatrixConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.fmatrix'
    verbose_name = 'F-matrizes e índices de balanço'
