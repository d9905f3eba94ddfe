from django.apps import AppConfig


class PcClusteringConfig(AppConfig):
    name = "projclust.pc_clustering"
