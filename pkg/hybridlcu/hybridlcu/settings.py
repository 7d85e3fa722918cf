"""
Django settings for the hybridlcu project.

The project has no web surface and no database: Django provides the
management-command CLI, settings and the test runner.
"""

from pathlib import Path
import os
from dotenv import load_dotenv

from hybridlcu import __version__

# load variables from .env file
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Application definition

INSTALLED_APPS = [
    'simulator',
]

DATABASES = {}

# custom variables
HYBRIDLCU_VERSION = __version__

# master seed used when --seed is not given
DEFAULT_SEED = int(os.getenv('HYBRIDLCU_SEED', '20240611'))
DEFAULT_SHOTS = int(os.getenv('HYBRIDLCU_SHOTS', '100000'))
DEFAULT_WORKERS = int(os.getenv('HYBRIDLCU_WORKERS', '1'))

OUTPUT_DIR = Path(os.getenv('HYBRIDLCU_OUTPUT_DIR', BASE_DIR / 'results'))

# golden run configs, one per command
GOLDEN_CONFIG_DIR = BASE_DIR / 'configs'

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': True,
        },
        'simulator': {
            'handlers': ['console'],
            'level': os.getenv('HYBRIDLCU_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}
