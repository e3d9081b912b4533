# src/stats/ols.py
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from src.errors import RankDeficientError, TooFewRowsError
from src.stats.distributions import t_two_sided_p

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class OlsFit:
    """Least-squares fit of y on an intercept plus named predictors.

    ``se``, ``t_stats`` and ``p_values`` are ordered intercept first, then
    the predictors in ``names`` order.
    """

    names: Tuple[str, ...]
    intercept: float
    slopes: np.ndarray
    se: np.ndarray
    residuals: np.ndarray
    sigma2: float
    t_stats: np.ndarray
    p_values: np.ndarray
    r2: float
    df_resid: int

    @property
    def n(self) -> int:
        """Number of observations."""
        return self.residuals.shape[0]

    @property
    def rss(self) -> float:
        """Residual sum of squares."""
        return float(self.residuals @ self.residuals)

    def _index(self, name: str) -> int:
        try:
            return self.names.index(name) + 1
        except ValueError:
            raise KeyError(f"'{name}' is not a predictor of this fit") from None

    def coef(self, name: str) -> float:
        """Slope of a named predictor."""
        return float(self.slopes[self._index(name) - 1])

    def se_of(self, name: str) -> float:
        """Standard error of a named predictor's slope."""
        return float(self.se[self._index(name)])

    def t_of(self, name: str) -> float:
        """t statistic of a named predictor's slope."""
        return float(self.t_stats[self._index(name)])

    def p_of(self, name: str) -> float:
        """Two-sided p-value of a named predictor's slope."""
        return float(self.p_values[self._index(name)])


def _design(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return np.column_stack([np.ones(X.shape[0]), X])


def solve_least_squares(y, X, rank_tol: float = RANK_TOL):
    """QR solve of y on [1, X]. Returns (coefficients, R) or raises RankDeficientError."""
    Z = _design(X)
    q, r = linalg.qr(Z, mode="economic")
    diag = np.abs(np.diag(r))
    largest = diag.max() if diag.size else 0.0
    smallest = diag.min() if diag.size else 0.0
    if largest == 0.0 or smallest < rank_tol * largest:
        ratio = np.inf if smallest == 0.0 else largest / smallest
        raise RankDeficientError(
            f"design matrix is numerically singular (R-diagonal ratio {ratio:.3g})",
            condition=ratio,
        )
    beta = linalg.solve_triangular(r, q.T @ np.asarray(y, dtype=float))
    return beta, r


def ols_fit(
    y, X, names: Optional[Sequence[str]] = None, rank_tol: float = RANK_TOL
) -> OlsFit:
    """Fit y = b0 + X b by least squares via QR decomposition."""
    y = np.asarray(y, dtype=float)
    Z = _design(X)
    n, k1 = Z.shape
    if names is None:
        names = tuple(f"x{i}" for i in range(1, k1))
    names = tuple(names)
    if len(names) != k1 - 1:
        raise ValueError("one name per predictor column is required")
    if n < k1 + 1:
        raise TooFewRowsError(n, required=k1 + 1)

    beta, r = solve_least_squares(y, Z[:, 1:], rank_tol=rank_tol)
    residuals = y - Z @ beta
    df_resid = n - k1
    rss = float(residuals @ residuals)
    sigma2 = rss / df_resid

    r_inv = linalg.solve_triangular(r, np.eye(k1))
    se = np.sqrt(sigma2 * np.sum(r_inv**2, axis=1))
    t_stats = np.divide(beta, se, out=np.zeros_like(beta), where=se > 0)
    t_stats = np.where((se == 0) & (beta != 0), np.sign(beta) * np.inf, t_stats)
    p_values = t_two_sided_p(t_stats, df_resid)

    centred = y - y.mean()
    tss = float(centred @ centred)
    r2 = 0.0 if tss == 0.0 else min(max(1.0 - rss / tss, 0.0), 1.0)

    return OlsFit(
        names=names,
        intercept=float(beta[0]),
        slopes=beta[1:],
        se=se,
        residuals=residuals,
        sigma2=sigma2,
        t_stats=t_stats,
        p_values=np.asarray(p_values, dtype=float),
        r2=r2,
        df_resid=df_resid,
    )
