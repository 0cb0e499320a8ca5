"""
Django settings for the editbench project.

The project hosts a single app, ``attrcontrast``, whose management commands
form the command-line surface. There is no web layer and no database.

For the full list of Django settings and their values, see
https://docs.djangoproject.com/en/3.2/ref/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv('SECRET_KEY', 'editbench')

DEBUG = bool(int(os.getenv('DEBUG', False)))

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'attrcontrast',
]

# Only SimpleTestCase is used, so Django falls back to its dummy backend.
DATABASES = {}

USE_TZ = True

TIME_ZONE = 'UTC'


REST_FRAMEWORK = {
    'UNICODE_JSON': True,
    'COMPACT_JSON': True,
    'STRICT_JSON': True,
}


# Defaults for every subcommand. A ``--config`` JSON file overrides any of them
# for a single run (see attrcontrast.serializers.ConfigSerializer).
ATTRCONTRAST = {
    'EMBEDDING_DIM': 32,
    'EXTRACTOR': {
        'kind': 'identity',
        'seed': 7,
        'out_dim': 8,
    },
    'LOSS_WEIGHTS': {
        'lambda1': 0.7,
        'lambda2': 0.6,
        'lambda3': 1.0,
        'lambda4': 0.9,
    },
    'GAMMA': 5.0,
    'SEED': 0,
    'NCE_STANDARD': False,
    'LEXICON_PATH': BASE_DIR / 'attrcontrast' / 'fixtures' / 'lexicon.tsv',
    'PROBABILITY_CLAMP': 1e-12,
    'GRADCHECK_EPS': 1e-5,
    'GRADCHECK_TOL': 1e-4,
    'LOG_LEVEL': 'INFO',
}
