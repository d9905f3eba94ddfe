"""
Base settings to build other settings files upon.
"""

from pathlib import Path

import environ

ROOT_DIR = Path(__file__).resolve(strict=True).parent.parent.parent
APPS_DIR = ROOT_DIR / "projclust"

env = environ.Env()
env.read_env(str(ROOT_DIR / ".env"))

# General

TIME_ZONE = "UTC"
LANGUAGE_CODE = "en-us"
USE_I18N = False
USE_TZ = True

# Databases
# Pipeline artifacts are CSV/JSON files on disk, nothing is persisted in a database

DATABASES = {}

# Apps

DJANGO_APPS = [
    "django.contrib.contenttypes",
]

LOCAL_APPS = [
    "projclust.pc_data.apps.PcDataConfig",
    "projclust.pc_model.apps.PcModelConfig",
    "projclust.pc_clustering.apps.PcClusteringConfig",
    "projclust.pc_analytics.apps.PcAnalyticsConfig",
]

INSTALLED_APPS = DJANGO_APPS + LOCAL_APPS

# App-specific Configuration

# ==> Pipeline defaults
# Every key can be overridden per run by a config file passed with --config
# (same KEY=value syntax as .env) or by command-line flags. Key names are
# documented in docs/config.md
PROJCLUST = {
    "INPUT": env("PROJCLUST_INPUT", default="data.csv"),
    "OUT": env("PROJCLUST_OUT", default="out"),
    "SEED": env.int("PROJCLUST_SEED", default=2023),
    "THREADS": env.int("PROJCLUST_THREADS", default=1),
    # design: random-effect basis, fixed-effect basis (empty = intercept only)
    "BASIS": env("PROJCLUST_BASIS", default="fourier:9"),
    "FIXED_BASIS": env("PROJCLUST_FIXED_BASIS", default=""),
    "USE_COVARIATES": env.bool("PROJCLUST_USE_COVARIATES", default=True),
    # shared set A: "all", "low:0..3", "mid:4..6", "high:7..9" or "0,1,2"
    "SHARED": env("PROJCLUST_SHARED", default="all"),
    # MCMC
    "MCMC_CHAINS": env.int("PROJCLUST_MCMC_CHAINS", default=4),
    "MCMC_ITER": env.int("PROJCLUST_MCMC_ITER", default=2000),
    "MCMC_BURN_IN": env.int("PROJCLUST_MCMC_BURN_IN", default=1000),
    "MCMC_THIN": env.int("PROJCLUST_MCMC_THIN", default=1),
    # priors
    "PRIOR_BETA_VAR": env.float("PROJCLUST_PRIOR_BETA_VAR", default=100.0),
    "PRIOR_SIGMA2_SHAPE": env.float("PROJCLUST_PRIOR_SIGMA2_SHAPE", default=0.01),
    "PRIOR_SIGMA2_RATE": env.float("PROJCLUST_PRIOR_SIGMA2_RATE", default=0.01),
    "PRIOR_G": env("PROJCLUST_PRIOR_G", default="inverse_wishart"),
    # inverse-Wishart degrees of freedom (empty = q + 2) and scale S0 = c I
    "PRIOR_G_DF": env("PROJCLUST_PRIOR_G_DF", default=""),
    "PRIOR_G_SCALE": env.float("PROJCLUST_PRIOR_G_SCALE", default=1.0),
    # per-component InvGamma for the diagonal G prior
    "PRIOR_G_SHAPE": env.float("PROJCLUST_PRIOR_G_SHAPE", default=0.01),
    "PRIOR_G_RATE": env.float("PROJCLUST_PRIOR_G_RATE", default=0.01),
    # number of clusters: fixed K, or a selection method (kl, bootstrap, both)
    "K": env("PROJCLUST_K", default=""),
    "SELECTION": env("PROJCLUST_SELECTION", default=""),
    "EPSILON": env.float("PROJCLUST_EPSILON", default=0.1),
    "BOOTSTRAP_B": env.int("PROJCLUST_BOOTSTRAP_B", default=100),
    "BOOTSTRAP_RULE": env("PROJCLUST_BOOTSTRAP_RULE", default="half_max"),
    "K_MAX": env.int("PROJCLUST_K_MAX", default=30),
    # number of posterior draws used by cluster / KL curve / fitted means (0 = all)
    "CLUSTER_DRAWS": env.int("PROJCLUST_CLUSTER_DRAWS", default=0),
    "CURVE_DRAWS": env.int("PROJCLUST_CURVE_DRAWS", default=100),
    "FITTED_DRAWS": env.int("PROJCLUST_FITTED_DRAWS", default=200),
    # projection clustering
    "RESTARTS": env.int("PROJCLUST_RESTARTS", default=10),
    "MAX_ITER": env.int("PROJCLUST_MAX_ITER", default=100),
    # synthetic example generator
    "SIM_PER_GROUP": env.int("PROJCLUST_SIM_PER_GROUP", default=10),
    "SIM_T": env.int("PROJCLUST_SIM_T", default=40),
    "SIM_NOISE_VAR": env.float("PROJCLUST_SIM_NOISE_VAR", default=0.1),
    "SIM_MISSING": env.float("PROJCLUST_SIM_MISSING", default=0.0),
    # power spectrum preprocessing
    "SPECTRUM_FREQS": env.int("PROJCLUST_SPECTRUM_FREQS", default=40),
    "SPECTRUM_H": env.float("PROJCLUST_SPECTRUM_H", default=0.5),
}

# Numerical tolerances shared by the Cholesky helpers
CHOLESKY_JITTER = env.float("PROJCLUST_CHOLESKY_JITTER", default=1e-8)
CHOLESKY_RETRIES = env.int("PROJCLUST_CHOLESKY_RETRIES", default=3)

# Logging
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "%(levelname)s %(asctime)s %(module)s "
            "%(process)d %(thread)d %(message)s"
        },
        "debug": {
            "format": "%(asctime)s - %(name)s "
            "[%(filename)s:%(lineno)s - %(funcName)5s()]  %(message)s"
        },
    },
    "handlers": {
        "console": {
            "level": "DEBUG",
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "root": {"level": "WARNING", "handlers": ["console"]},
    "loggers": {
        "projclust": {"level": "INFO", "handlers": ["console"], "propagate": False},
    },
}
