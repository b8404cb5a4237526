from django.apps import AppConfig


class NeutralityConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.neutrality'
    verbose_name = 'Testes de neutralidade'
