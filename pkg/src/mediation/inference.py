# src/mediation/inference.py
"""Standard error of the mediated effect and its confidence limits."""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import Any, Dict, Optional

import numpy as np

from src.data.loader import Dataset
from src.engine.replication import map_indexed, standard_normals, stream
from src.errors import (
    AllResamplesDegenerateError,
    InvalidLevelError,
    RankDeficientError,
    TooFewDrawsError,
    TooFewReplicatesError,
    ZeroSeError,
)
from src.mediation.analysis import MediationFit, indirect_effect
from src.stats.distributions import check_level, critical_z, excess_kurtosis, normal_two_sided_p

logger = logging.getLogger(__name__)

MIN_BOOT_REPS = 100
MIN_DRAWS = 10_000

# stream purposes, so bootstrap and product draws never share a stream
_BOOTSTRAP_STREAM = 1
_PRODUCT_STREAM = 2


class CiMethod(Enum):
    NORMAL = "normal"
    BOOTSTRAP = "bootstrap"
    PRODUCT = "product"


@dataclass(frozen=True)
class IntervalEstimate:
    point: float
    lower: float
    upper: float
    level: float
    method: CiMethod
    se: Optional[float] = None
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 < self.level < 1.0):
            raise InvalidLevelError(f"confidence level must lie in (0, 1), got {self.level}")
        if self.lower > self.upper:
            raise ValueError("interval lower limit exceeds upper limit")

    def contains(self, value: float) -> bool:
        """True when value lies within the closed interval."""
        return self.lower <= value <= self.upper

    @property
    def width(self) -> float:
        """Upper minus lower limit."""
        return self.upper - self.lower


@dataclass(frozen=True)
class SobelTest:
    z: float
    p: float


def product_se(beta3, se3, betaM, seM, exact: bool = False) -> float:
    """First-order delta-method se of beta3*betaM; ``exact`` adds se3^2*seM^2."""
    var = betaM**2 * se3**2 + beta3**2 * seM**2
    if exact:
        var += se3**2 * seM**2
    return float(np.sqrt(var))


def sobel_se(fit: MediationFit, exact: bool = False) -> float:
    """Delta-method standard error of the fitted mediated effect."""
    return product_se(fit.beta3, fit.se_beta3, fit.betaM, fit.se_betaM, exact=exact)


def exact_se(fit: MediationFit) -> float:
    """Exact standard deviation of a product of independent normal estimates."""
    return sobel_se(fit, exact=True)


def z_test(estimate: float, se: float) -> SobelTest:
    """Two-sided normal test of estimate / se."""
    if se <= 0:
        raise ZeroSeError("standard error of the mediated effect is zero")
    z = estimate / se
    return SobelTest(z=float(z), p=normal_two_sided_p(z))


def sobel_test(fit: MediationFit) -> SobelTest:
    """z-test of beta3*betaM against the standard normal."""
    return z_test(fit.beta3 * fit.betaM, sobel_se(fit))


def normal_ci(point: float, se: float, level: float = 0.95) -> IntervalEstimate:
    """Symmetric normal-theory limits point +/- z * se."""
    if se < 0:
        raise ValueError("se must be non-negative")
    half = critical_z(level) * se
    return IntervalEstimate(
        point=point,
        lower=point - half,
        upper=point + half,
        level=level,
        method=CiMethod.NORMAL,
        se=se,
    )


def _percentiles(values: np.ndarray, level: float):
    w = 1.0 - level
    lower, upper = np.quantile(values, [w / 2.0, 1.0 - w / 2.0])
    return float(lower), float(upper)


def _boot_replicate(index, xv, mv, yv, seed):
    rng = stream(seed, index, _BOOTSTRAP_STREAM)
    rows = rng.integers(0, xv.shape[0], size=xv.shape[0])
    try:
        return indirect_effect(xv[rows], mv[rows], yv[rows])
    except RankDeficientError:
        return float("nan")


def bootstrap_ci(
    data: Dataset,
    x: str,
    m: str,
    y: str,
    B: int = 2000,
    seed: int = None,
    level: float = 0.95,
    workers: int = 1,
) -> IntervalEstimate:
    """Percentile bootstrap interval for beta3*betaM by case resampling."""
    if B < MIN_BOOT_REPS:
        raise TooFewReplicatesError(f"need at least {MIN_BOOT_REPS} bootstrap replicates, got {B}")
    check_level(level)
    if seed is None:
        raise ValueError("bootstrap_ci requires an explicit seed")
    xv, mv, yv = data.column(x), data.column(m), data.column(y)
    point = indirect_effect(xv, mv, yv)

    func = partial(_boot_replicate, xv=xv, mv=mv, yv=yv, seed=seed)
    effects = np.asarray(map_indexed(func, range(B), workers=workers), dtype=float)
    valid = effects[np.isfinite(effects)]
    skipped = B - valid.size
    if valid.size == 0:
        raise AllResamplesDegenerateError(f"all {B} bootstrap resamples were rank deficient")
    if skipped:
        logger.warning(f"Skipped {skipped} rank-deficient bootstrap resample(s)")
    lower, upper = _percentiles(valid, level)
    boot_se = float(np.std(valid, ddof=1)) if valid.size > 1 else 0.0
    return IntervalEstimate(
        point=point,
        lower=lower,
        upper=upper,
        level=level,
        method=CiMethod.BOOTSTRAP,
        se=boot_se,
        meta={"replicates": B, "used": int(valid.size), "skipped": int(skipped), "seed": seed},
    )


def product_draws(beta3, se3, betaM, seM, draws: int, seed: int) -> np.ndarray:
    """Simulated (beta3 + se3*Z1) * (betaM + seM*Z2)."""
    rng = stream(seed, 0, _PRODUCT_STREAM)
    z = standard_normals(rng, (2, draws))
    return (beta3 + se3 * z[0]) * (betaM + seM * z[1])


def product_distribution_ci(
    fit: MediationFit, draws: int = 100_000, seed: int = None, level: float = 0.95
) -> IntervalEstimate:
    """Asymmetric limits from the simulated distribution of the product."""
    return product_ci_from(
        fit.beta3, fit.se_beta3, fit.betaM, fit.se_betaM, draws=draws, seed=seed, level=level
    )


def product_ci_from(beta3, se3, betaM, seM, draws=100_000, seed=None, level=0.95) -> IntervalEstimate:
    """Product-distribution limits from raw path estimates and SEs."""
    if draws < MIN_DRAWS:
        raise TooFewDrawsError(f"need at least {MIN_DRAWS} draws, got {draws}")
    check_level(level)
    if seed is None:
        raise ValueError("product_distribution_ci requires an explicit seed")
    sample = product_draws(beta3, se3, betaM, seM, draws, seed)
    lower, upper = _percentiles(sample, level)
    point = float(beta3 * betaM)
    return IntervalEstimate(
        point=point,
        lower=lower,
        upper=upper,
        level=level,
        method=CiMethod.PRODUCT,
        se=float(np.std(sample, ddof=1)),
        meta={"draws": draws, "seed": seed, "excess_kurtosis": excess_kurtosis(sample)},
    )
