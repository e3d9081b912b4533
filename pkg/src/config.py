# src/config.py
import logging
import os
from dataclasses import dataclass, replace
from typing import Optional, Tuple

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnalysisDefaults:
    """Default budgets and tolerances shared by the CLI and the library."""

    alpha: float = 0.05
    level: float = 0.95
    boot_reps: int = 2000
    draws: int = 100_000
    consistency_tol: float = 1e-8
    strict_moments: bool = False
    max_iter: int = 500
    grad_tol: float = 1e-8
    ftol: float = 1e-12
    rank_tol: float = 1e-10
    workers: int = 1
    missing_markers: Tuple[str, ...] = ("", "NA", "NaN")
    delimiter: str = ","
    log_file: Optional[str] = None


def _int_from_env(name, fallback):
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring {name}={raw!r}: not an integer")
        return fallback
    if value < 1:
        logger.warning(f"Ignoring {name}={raw!r}: must be positive")
        return fallback
    return value


def load_defaults() -> AnalysisDefaults:
    """Build defaults, applying PATHMED_* environment overrides."""
    base = AnalysisDefaults()
    return replace(
        base,
        workers=_int_from_env("PATHMED_WORKERS", base.workers),
        boot_reps=_int_from_env("PATHMED_BOOT_REPS", base.boot_reps),
        draws=_int_from_env("PATHMED_DRAWS", base.draws),
        log_file=os.environ.get("PATHMED_LOG_FILE") or None,
    )
