from django.apps import AppConfig


class BcpConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.bcp'
    verbose_name = 'Processo de contagem de blocos'
