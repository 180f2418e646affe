import os
import logging
from typing import Optional

# Configure logging
logger = logging.getLogger(__name__)

# Environment variable names
TAIL_TOL_ENV = "TRIGSPLINE_TAIL_TOL"
TAIL_MAX_TERMS_ENV = "TRIGSPLINE_TAIL_MAX_TERMS"
DEGENERACY_TOL_ENV = "TRIGSPLINE_DEGENERACY_TOL"
LOG_LEVEL_ENV = "TRIGSPLINE_LOG_LEVEL"

# Defaults used when the environment says nothing
DEFAULT_TAIL_REL_TOL = 1e-12
DEFAULT_TAIL_MAX_TERMS = 200000
DEFAULT_DEGENERACY_REL_TOL = 1e-10
DEFAULT_LOG_LEVEL = "WARNING"

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _env_positive_float(name: str, default: float) -> float:
    """Read a positive float from the environment, falling back to the default"""
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default

    try:
        value = float(raw)
    except ValueError:
        logger.warning(f"Ignoring {name}={raw!r}: not a number")
        return default

    if not value > 0.0 or value == float("inf"):
        logger.warning(f"Ignoring {name}={raw!r}: must be a positive finite number")
        return default

    return value


def _env_positive_int(name: str, default: int) -> int:
    """Read a positive integer from the environment, falling back to the default"""
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default

    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring {name}={raw!r}: not an integer")
        return default

    if value < 1:
        logger.warning(f"Ignoring {name}={raw!r}: must be at least 1")
        return default

    return value


def default_tail_rel_tol() -> float:
    """Relative tolerance for truncating the alias series"""
    return _env_positive_float(TAIL_TOL_ENV, DEFAULT_TAIL_REL_TOL)


def default_tail_max_terms() -> int:
    """Largest number of alias indices m summed per harmonic"""
    return _env_positive_int(TAIL_MAX_TERMS_ENV, DEFAULT_TAIL_MAX_TERMS)


def degeneracy_rel_tol() -> float:
    """Relative threshold below which an interpolation factor is unusable"""
    return _env_positive_float(DEGENERACY_TOL_ENV, DEFAULT_DEGENERACY_REL_TOL)


def configure_logging(level: Optional[str] = None) -> None:
    """Set up root logging on stderr; the level comes from the argument or the environment"""
    name = (level or os.environ.get(LOG_LEVEL_ENV) or DEFAULT_LOG_LEVEL).upper()
    numeric = logging.getLevelName(name)
    if not isinstance(numeric, int):
        numeric = logging.WARNING

    logging.basicConfig(level=numeric, format=LOG_FORMAT, force=True)
    logger.debug(f"Logging configured at {logging.getLevelName(numeric)}")
