"""
With these settings, tests run faster.
"""

from .base import *  # noqa
from .base import LOGGING, PROJCLUST, env

# General

SECRET_KEY = env(
    "DJANGO_SECRET_KEY",
    default="TSjr7VIP1j98nKm5dc3AqbkZKXwMAguZh1M2UALvL1GITCNFl3LHnNgfcfCRiHy6",
)

TEST_RUNNER = "django.test.runner.DiscoverRunner"

# Pipeline

# Small MCMC runs keep command tests quick; tests needing the full defaults
# override these through the settings fixture
PROJCLUST.update(
    {
        "MCMC_CHAINS": 2,
        "MCMC_ITER": 200,
        "MCMC_BURN_IN": 100,
        "BOOTSTRAP_B": 10,
        "K_MAX": 6,
        "CURVE_DRAWS": 10,
    }
)

# Logging

# caplog listens on the root logger
LOGGING["loggers"]["projclust"]["propagate"] = True
