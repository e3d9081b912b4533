# src/stats/distributions.py
"""Tail probabilities and quantiles used across the package.

Thin wrappers over ``scipy.special`` so every caller agrees on edge cases
(t = 0 gives p = 1 exactly, df = 0 chi-square gives p = 1).
"""

import numpy as np
from scipy import special, stats

from src.errors import InvalidAlphaError, InvalidLevelError


def normal_cdf(x):
    """Standard normal CDF."""
    return special.ndtr(x)


def normal_quantile(u):
    """Standard normal quantile for 0 < u < 1."""
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0.0) | (u >= 1.0)):
        raise ValueError("normal quantile needs 0 < u < 1")
    out = special.ndtri(u)
    return float(out) if out.ndim == 0 else out


def normal_two_sided_p(z: float) -> float:
    """Two-sided p-value of a z statistic."""
    return float(2.0 * special.ndtr(-abs(z)))


def t_two_sided_p(t, df):
    """Two-sided Student-t p-value (regularized incomplete beta via stdtr)."""
    t = np.abs(np.asarray(t, dtype=float))
    p = 2.0 * special.stdtr(df, -t)
    return np.minimum(p, 1.0)


def chi2_sf(x: float, df: int) -> float:
    """Upper chi-square tail (regularized upper incomplete gamma)."""
    if df <= 0:
        return 1.0
    return float(special.chdtrc(df, max(x, 0.0)))


def critical_z(level: float) -> float:
    """z_{1-w/2} for confidence level 1 - w."""
    check_level(level)
    return float(special.ndtri(1.0 - (1.0 - level) / 2.0))


def check_level(level: float) -> float:
    """Reject confidence levels outside (0, 1)."""
    if not (0.0 < level < 1.0):
        raise InvalidLevelError(f"confidence level must lie in (0, 1), got {level}")
    return level


def check_alpha(alpha: float) -> float:
    """Reject significance levels outside (0, 1)."""
    if not (0.0 < alpha < 1.0):
        raise InvalidAlphaError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def excess_kurtosis(values) -> float:
    """Sample excess kurtosis m4 / m2^2 - 3 (moment estimator)."""
    return float(stats.kurtosis(np.asarray(values, dtype=float), fisher=True, bias=True))
