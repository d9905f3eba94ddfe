from .base import *  # noqa
from .base import LOGGING, env

# General

DEBUG = env.bool("DJANGO_DEBUG", True)

SECRET_KEY = env(
    "DJANGO_SECRET_KEY",
    default="5f3L19XwGlfzvyaHwWjtYDvQbFFM3qjzsWwbUI1XddPysCQGN1kv4y7RWY6TqWum",
)

# Logging

LOGGING["loggers"]["projclust"]["level"] = "DEBUG"
LOGGING["handlers"]["console"]["formatter"] = "debug"
