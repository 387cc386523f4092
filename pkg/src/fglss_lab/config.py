"""Environment-driven configuration for FGLSS Lab."""

import logging
import os
from typing import Any

# Environment variable names and their defaults
ENV_LC_ENUM_CAP = "FGLSS_LAB_LC_ENUM_CAP"
ENV_SUPPORT_CAP = "FGLSS_LAB_SUPPORT_CAP"
ENV_GOOD_QUERY_CAP = "FGLSS_LAB_GOOD_QUERY_CAP"
ENV_MWIS_MAX_VERTICES = "FGLSS_LAB_MWIS_MAX_VERTICES"
ENV_LOG_LEVEL = "FGLSS_LAB_LOG_LEVEL"
ENV_MC_BLOCK_SIZE = "FGLSS_LAB_MC_BLOCK_SIZE"

DEFAULT_LC_ENUM_CAP = 10**7
DEFAULT_SUPPORT_CAP = 2**25
DEFAULT_GOOD_QUERY_CAP = 10**8
DEFAULT_MWIS_MAX_VERTICES = 60
DEFAULT_LOG_LEVEL = "WARNING"
DEFAULT_MC_BLOCK_SIZE = 4096

VALID_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _int_from_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw.strip())
    except ValueError as e:
        raise ValueError(f"{name} must be an integer, got: {raw}") from e
    if value <= 0:
        raise ValueError(f"{name} must be a positive integer, got: {value}")
    return value


def get_lab_config() -> dict[str, Any]:
    """Get lab configuration from environment variables.

    Returns:
        dict: Configuration with keys:
            - lc_enum_cap: labeling enumeration cap for exact Label Cover value
            - support_cap: support-size cap for exact acceptance enumeration
            - good_query_cap: enumeration cap for the good-query checker
            - mwis_max_vertices: vertex cap for the exact MWIS solver
            - mc_block_size: trials per Monte Carlo block (fixes seed derivation)
            - log_level: logging level name

    Raises:
        ValueError: If any variable is malformed
    """
    log_level = os.getenv(ENV_LOG_LEVEL, DEFAULT_LOG_LEVEL).strip().upper()
    if log_level not in VALID_LOG_LEVELS:
        raise ValueError(
            f"{ENV_LOG_LEVEL} must be one of {VALID_LOG_LEVELS}, got: {log_level}"
        )

    return {
        "lc_enum_cap": _int_from_env(ENV_LC_ENUM_CAP, DEFAULT_LC_ENUM_CAP),
        "support_cap": _int_from_env(ENV_SUPPORT_CAP, DEFAULT_SUPPORT_CAP),
        "good_query_cap": _int_from_env(ENV_GOOD_QUERY_CAP, DEFAULT_GOOD_QUERY_CAP),
        "mwis_max_vertices": _int_from_env(ENV_MWIS_MAX_VERTICES, DEFAULT_MWIS_MAX_VERTICES),
        "mc_block_size": _int_from_env(ENV_MC_BLOCK_SIZE, DEFAULT_MC_BLOCK_SIZE),
        "log_level": log_level,
    }


def configure_logging() -> None:
    """Configure root logging from FGLSS_LAB_LOG_LEVEL (stderr only)."""
    level = get_lab_config()["log_level"]
    logging.basicConfig(
        level=getattr(logging, level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
