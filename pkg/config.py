import os


def _env_int(name, default):
    value = os.environ.get(name)
    if value is None or value.strip() == '':
        return default
    try:
        return int(value)
    except ValueError:
        return default


class Config:
    """Application configuration"""

    # Base directory
    BASE_DIR = os.path.abspath(os.path.dirname(__file__))

    # Run archive database
    SQLALCHEMY_DATABASE_URI = os.environ.get('BBLAB_DATABASE_URI') or \
        'sqlite:///' + os.path.join(BASE_DIR, 'bblab.db')
    SQLALCHEMY_TRACK_MODIFICATIONS = False
    SQLALCHEMY_ENGINE_OPTIONS = {
        'connect_args': {
            'check_same_thread': False,
            'timeout': 30
        }
    }

    # HTTP service settings
    HOST = os.environ.get('BBLAB_HOST', '127.0.0.1')
    PORT = _env_int('BBLAB_PORT', 29912)
    DEBUG = False

    # Worker pool width for verify/search partitions
    WORKERS = max(1, _env_int('BBLAB_WORKERS', 1))

    # Randomness: omitted seeds fall back to this, never to wall-clock
    DEFAULT_SEED = 0

    # Bias grid covering the extreme-bias regimes
    DEFAULT_P_GRID = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95)

    # Tolerances
    IDENTITY_TOLERANCE = 1e-9
    INEQUALITY_TOLERANCE = 1e-9
    SUPPORT_TOLERANCE = 1e-6
    SUPPORT_ZERO_TOL = 1e-10

    # Size limits
    MAX_N = 24
    EXHAUSTIVE_MAX_N = 4
    LONG_EXHAUSTIVE_MAX_N = 5
    IDENTITY_MAX_N = 8
    LEDGER_MAX_N = 6
    RANDOM_SEARCH_MAX_N = 20

    # Search
    LEADERBOARD_K = 20
    ARGMIN_CAP = 64
    ANNEAL_TEMPERATURE_FACTOR = 0.1
    ANNEAL_DECAY = 0.95

    # Monte Carlo block size (samples per independently seeded block)
    MC_BLOCK_SIZE = 1 << 16

    # Discord webhook for findings (empty disables)
    WEBHOOK_URL = os.environ.get('BBLAB_WEBHOOK_URL', '')

    # Timestamps
    TIMEZONE = os.environ.get('BBLAB_TIMEZONE', 'UTC')

    # Logging
    LOG_LEVEL = os.environ.get('BBLAB_LOG_LEVEL', 'INFO')
    LOG_FORMAT = '[%(asctime)s] %(levelname)s: %(message)s'
    LOG_DATEFMT = '%H:%M:%S'
