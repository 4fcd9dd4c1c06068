import os
import logging

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_ROOT = 'runs'
LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR']


def load_env_file(path='.env'):
    """Load environment variables from .env file if it exists"""
    try:
        with open(path, 'r') as f:
            for line in f:
                if line.strip() and not line.startswith('#') and '=' in line:
                    key, value = line.strip().split('=', 1)
                    os.environ.setdefault(key.strip(), value.strip())
    except FileNotFoundError:
        pass  # no .env, use the process environment


def get_output_root():
    """Default output root for run directories (GBO_LAB_OUT)"""
    return os.getenv('GBO_LAB_OUT', DEFAULT_OUTPUT_ROOT)


def get_default_jobs():
    """Default worker count for sweeps (GBO_LAB_JOBS)"""
    raw = os.getenv('GBO_LAB_JOBS', '1')
    try:
        jobs = int(raw)
    except ValueError:
        logger.warning("⚠️ Invalid GBO_LAB_JOBS value: %s. Defaulting to 1", raw)
        return 1
    if jobs < 1:
        logger.warning("⚠️ GBO_LAB_JOBS must be positive, got %d. Defaulting to 1", jobs)
        return 1
    return jobs


def get_log_level():
    """Logging level name from GBO_LAB_LOG_LEVEL"""
    level = os.getenv('GBO_LAB_LOG_LEVEL', 'INFO').upper()
    if level not in LOG_LEVELS:
        logger.warning("⚠️ Invalid GBO_LAB_LOG_LEVEL value: %s. Defaulting to INFO", level)
        level = 'INFO'
    return level
