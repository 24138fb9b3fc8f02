from django.apps import AppConfig


class DriftAuditConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'drift_audit'
