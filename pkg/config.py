import os
import logging

from dotenv import load_dotenv

# Load environment variables from .env file (if it exists)
load_dotenv()

logger = logging.getLogger(__name__)


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {name}={raw!r}; using {default}")
        return default


def _env_bool(name: str, default: bool) -> bool:
    raw = os.environ.get(name)
    if raw is None:
        return default
    return raw.strip().lower() in ("1", "true", "yes", "on")


# --- Monte Carlo defaults ---
DEFAULT_SEED = _env_int("ELORDER_SEED", 20110401)
DEFAULT_WORKERS = _env_int("ELORDER_WORKERS", 1)
DEFAULT_CHUNK_SIZE = _env_int("ELORDER_CHUNK_SIZE", 500)
DEFAULT_LIMIT_GRID = _env_int("ELORDER_LIMIT_GRID", 1000)

# --- Null-distribution cache ---
CACHE_DIR = os.environ.get("ELORDER_CACHE_DIR", ".elorder_cache")
CACHE_ENABLED = _env_bool("ELORDER_CACHE_ENABLED", True)

# --- Logging ---
LOG_LEVEL = os.environ.get("ELORDER_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'
