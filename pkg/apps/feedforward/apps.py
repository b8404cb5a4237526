from django.apps import AppConfig


class FeedforwardConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.feedforward'
    verbose_name = 'Momentos feed-forward'
