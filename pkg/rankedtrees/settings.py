"""
Django settings for rankedtrees project.
"""

import os
from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-change-this-in-production')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = config('DEBUG', default=True, cast=bool)

ALLOWED_HOSTS = config('ALLOWED_HOSTS', default='localhost,127.0.0.1,testserver', cast=lambda v: [s.strip() for s in v.split(',')])

# Application definition
DJANGO_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
]

THIRD_PARTY_APPS = [
    'rest_framework',
]

LOCAL_APPS = [
    'apps.core',
    'apps.statespace',
    'apps.kingman',
    'apps.fmatrix',
    'apps.frechet',
    'apps.phasetype',
    'apps.feedforward',
    'apps.bcp',
    'apps.betasplit',
    'apps.neutrality',
]

INSTALLED_APPS = DJANGO_APPS + THIRD_PARTY_APPS + LOCAL_APPS

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.middleware.common.CommonMiddleware',
]

ROOT_URLCONF = 'rankedtrees.urls'

# Sem modelos persistentes: o banco só existe para satisfazer o contrib.auth
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

# Internationalization
LANGUAGE_CODE = 'pt-br'
TIME_ZONE = 'America/Sao_Paulo'
USE_I18N = True
USE_TZ = True

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# REST Framework settings
REST_FRAMEWORK = {
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [
        'rest_framework.permissions.AllowAny',
    ],
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'UNAUTHENTICATED_USER': None,
}

# Configurações do coalescente ranqueado
RANKEDTREES_MAX_N = config('RANKEDTREES_MAX_N', default=30, cast=int)
RANKEDTREES_EXACT_MAX_N = config('RANKEDTREES_EXACT_MAX_N', default=12, cast=int)
RANKEDTREES_ENUMERATION_MAX_N = config('RANKEDTREES_ENUMERATION_MAX_N', default=12, cast=int)
RANKEDTREES_THREADS = config('RANKEDTREES_THREADS', default=os.cpu_count() or 1, cast=int)
RANKEDTREES_TIE_TOLERANCE = config('RANKEDTREES_TIE_TOLERANCE', default=1e-9, cast=float)
RANKEDTREES_MAX_MEAN_PATHS = config('RANKEDTREES_MAX_MEAN_PATHS', default=1_000_000, cast=int)
RANKEDTREES_EIGEN_FLOOR = config('RANKEDTREES_EIGEN_FLOOR', default=1e-12, cast=float)
RANKEDTREES_MIN_EXPECTED = config('RANKEDTREES_MIN_EXPECTED', default=5.0, cast=float)

# Configurações de logging
LOG_LEVEL = config('LOG_LEVEL', default='INFO')
LOG_FILE = config('LOG_FILE', default='')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'apps': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}

if LOG_FILE:
    LOGGING['handlers']['file'] = {
        'level': 'INFO',
        'class': 'logging.FileHandler',
        'filename': LOG_FILE,
        'formatter': 'verbose',
    }
    LOGGING['loggers']['apps']['handlers'].append('file')
