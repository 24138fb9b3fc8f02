from django.apps import AppConfig


class ProtoAnalysisConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'proto_analysis'
