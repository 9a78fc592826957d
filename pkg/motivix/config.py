import logging
import os

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


def _safe_int_env(var_name: str, default: int, minimum: int = 1) -> int:
    raw_value = os.getenv(var_name, str(default))
    try:
        value = int(raw_value)
    except (TypeError, ValueError):
        logger.warning("Ignoring malformed %s=%r, using %d", var_name, raw_value, default)
        return max(default, minimum)
    return max(value, minimum)


def _safe_float_env(var_name: str, default: float) -> float:
    raw_value = os.getenv(var_name)
    if raw_value is None:
        return default
    try:
        return float(raw_value)
    except (TypeError, ValueError):
        logger.warning("Ignoring malformed %s=%r, using %s", var_name, raw_value, default)
        return default


def _safe_bool_env(var_name: str, default: bool) -> bool:
    raw_value = os.getenv(var_name)
    if raw_value is None:
        return default
    return raw_value.strip().lower() in {"1", "true", "yes", "on"}


# ---- ENGINE CONFIG ----
THREADS = _safe_int_env("MOTIVIX_THREADS", os.cpu_count() or 1)
SHOW_PROGRESS = _safe_bool_env("MOTIVIX_PROGRESS", False)
LOG_LEVEL = os.getenv("MOTIVIX_LOG_LEVEL", "WARNING")

# ---- DEGREE ORACLE ----
DEGREE_PRIMES = _safe_int_env("MOTIVIX_DEGREE_PRIMES", 3, minimum=3)
DEGREE_SAMPLES = _safe_int_env("MOTIVIX_DEGREE_SAMPLES", 6)
DEGREE_SEED = _safe_int_env("MOTIVIX_DEGREE_SEED", 20240601, minimum=0)

# ---- SEARCH ----
MAX_FREE_CELLS = _safe_int_env("MOTIVIX_MAX_FREE_CELLS", 4, minimum=0)

# ---- API ----
API_CONCURRENCY = _safe_int_env("MOTIVIX_API_CONCURRENCY", 2)
API_TIMEOUT_SECONDS = _safe_float_env("MOTIVIX_API_TIMEOUT_SECONDS", 600.0)
ALLOWED_ORIGINS = [
    origin.strip() for origin in os.getenv("ALLOWED_ORIGINS", "*").split(",") if origin.strip()
]


def configure_logging(level: str | None = None) -> None:
    logging.basicConfig(level=(level or LOG_LEVEL).upper(), format=LOG_FORMAT)


def resolve_threads(requested: int | None) -> int:
    """Worker count for a run: an explicit request wins, capped below by 1."""
    if requested is None:
        return THREADS
    return max(1, requested)
