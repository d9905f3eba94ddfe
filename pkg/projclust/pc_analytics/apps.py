from django.apps import AppConfig


class PcAnalyticsConfig(AppConfig):
    name = "projclust.pc_analytics"
