from django.apps import AppConfig


class PcModelConfig(AppConfig):
    name = "projclust.pc_model"
    verbose_name = "Mixed model sampler"
