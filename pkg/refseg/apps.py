from django.apps import AppConfig


class RefsegConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'refseg'
