"""
Django settings for the exchange_lab project.

The project has no web surface: Django provides configuration, the ORM
for run history and the management-command front door.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.0/ref/settings/
"""
import os
from pathlib import Path

import dj_database_url
from dotenv import load_dotenv

load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Only used by Django internals, nothing is signed or served
SECRET_KEY = os.getenv(
    "DJANGO_SECRET_KEY", "exchange-lab-local-only-not-a-secret"
)

DEBUG = False

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "rest_framework",
    "exchange_lab.core",
]

# Database
# https://docs.djangoproject.com/en/4.0/ref/settings/#databases

DATABASES = {
    "default": dj_database_url.config(
        default=f"sqlite:///{BASE_DIR / 'db.sqlite3'}", conn_max_age=600
    )
}

# Internationalization

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

# Default primary key field type

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# Rest Framework Settings
# Serializers only, no views; keep float output exact

REST_FRAMEWORK = {
    "COERCE_DECIMAL_TO_STRING": False,
    "UNAUTHENTICATED_USER": None,
}

# Logging goes to stderr; stdout belongs to command output

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "plain",
        },
    },
    "loggers": {
        "exchange_lab": {
            "handlers": ["console"],
            "level": os.getenv("EXCHANGE_LAB_LOG_LEVEL", "WARNING"),
            "propagate": False,
        },
    },
}

# Exchange Lab Settings

EXCHANGE_LAB = {
    # Largest register the bitmask kernels accept
    "FAST_PATH_MAX_MODES": int(
        os.getenv("EXCHANGE_LAB_FAST_PATH_MAX_MODES", "28")
    ),
    # 2^12 x 2^12 complex doubles is the desk-scale ceiling
    "ORACLE_MAX_MODES": int(os.getenv("EXCHANGE_LAB_ORACLE_MAX_MODES", "12")),
    "SECTOR_MAX_DIMENSION": 4096,
    "PRUNE_THRESHOLD": 1e-15,
    "VISIBILITY_FLOOR": 1e-9,
    "CHECK_TOLERANCE": 1e-12,
    "RESULT_SCHEMA_VERSION": "1",
}
