from django.apps import AppConfig


class PcDataConfig(AppConfig):
    name = "projclust.pc_data"
