from django.apps import AppConfig


class CoreConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "exchange_lab.core"
    verbose_name = "Exchange Lab"
