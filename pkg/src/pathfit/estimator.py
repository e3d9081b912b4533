# src/pathfit/estimator.py
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy import linalg, optimize

from src.data.loader import SampleMoments
from src.errors import NonConvergenceError, NotPositiveDefiniteError, UnderIdentifiedError
from src.model.dsl import ModelSpec, validate_against_columns
from src.pathfit.matrices import PathModelMatrices, build_matrices, implied_covariance
from src.stats.distributions import chi2_sf, normal_two_sided_p

logger = logging.getLogger(__name__)

OPTIMALITY_TOL = 1e-6


@dataclass(frozen=True)
class FitStatistics:
    chi_square: float
    df: int
    p_value: float
    f_min: float
    n: int
    p: int
    converged: bool = True
    iterations: int = 0


@dataclass(frozen=True)
class ParameterEstimate:
    label: str
    kind: str
    estimate: float
    se: Optional[float]
    z: Optional[float]
    p_value: Optional[float]


@dataclass(frozen=True, eq=False)
class PathFitResult:
    spec: ModelSpec
    matrices: PathModelMatrices
    theta: np.ndarray
    estimates: List[ParameterEstimate]
    statistics: FitStatistics
    implied: np.ndarray
    moments: SampleMoments
    effects: List[Dict[str, float]] = field(default_factory=list)

    def estimate(self, label: str) -> float:
        """Point estimate of a labelled free parameter."""
        for est in self.estimates:
            if est.label == label:
                return est.estimate
        raise KeyError(label)


def _chol_logdet(matrix: np.ndarray):
    """(cho_factor, log|matrix|); raises LinAlgError when not positive definite."""
    factor = linalg.cho_factor(matrix, lower=True, check_finite=False)
    return factor, 2.0 * float(np.sum(np.log(np.diag(factor[0]))))


def check_positive_definite(cov: np.ndarray, what="sample covariance matrix"):
    """Cholesky factor and log-determinant, or NotPositiveDefiniteError."""
    try:
        return _chol_logdet(cov)
    except linalg.LinAlgError:
        raise NotPositiveDefiniteError(f"{what} is not positive definite") from None


class MLDiscrepancy:
    """F(theta) = ln|Sigma| + tr(S Sigma^-1) - ln|S| - p and its gradient."""

    def __init__(self, template: PathModelMatrices, sample_cov: np.ndarray):
        self.template = template
        self.S = sample_cov
        self.p = sample_cov.shape[0]
        _, self.logdet_S = check_positive_definite(sample_cov)
        self.identity = np.eye(self.p)

    def _parts(self, theta):
        mats = self.template.with_params(theta)
        B = np.linalg.inv(self.identity - mats.A)
        sigma = B @ mats.S @ B.T
        sigma = (sigma + sigma.T) / 2.0
        return mats, B, sigma

    def value(self, theta) -> float:
        """Discrepancy at theta; inf where Sigma is not positive definite."""
        _, _, sigma = self._parts(theta)
        try:
            factor, logdet = _chol_logdet(sigma)
        except linalg.LinAlgError:
            return np.inf
        trace = np.trace(linalg.cho_solve(factor, self.S, check_finite=False))
        return float(logdet + trace - self.logdet_S - self.p)

    def gradient(self, theta) -> np.ndarray:
        """Analytic gradient of the discrepancy with respect to theta."""
        _, B, sigma = self._parts(theta)
        try:
            factor, _ = _chol_logdet(sigma)
        except linalg.LinAlgError:
            return np.full(len(theta), np.nan)
        inv = linalg.cho_solve(factor, self.identity, check_finite=False)
        W = inv - inv @ self.S @ inv
        grad_A = 2.0 * B.T @ W @ sigma
        grad_S = B.T @ W @ B
        out = np.empty(len(theta))
        for k, f in enumerate(self.template.free):
            if f.matrix == "A":
                out[k] = grad_A[f.row, f.col]
            elif f.row == f.col:
                out[k] = grad_S[f.row, f.col]
            else:
                out[k] = 2.0 * grad_S[f.row, f.col]
        return out

    def hessian(self, theta) -> np.ndarray:
        """Central differences of the analytic gradient, symmetrized."""
        theta = np.asarray(theta, dtype=float)
        q = theta.size
        H = np.empty((q, q))
        for k in range(q):
            h = 1e-5 * max(1.0, abs(theta[k]))
            up, down = theta.copy(), theta.copy()
            up[k] += h
            down[k] -= h
            H[:, k] = (self.gradient(up) - self.gradient(down)) / (2.0 * h)
        return (H + H.T) / 2.0


def starting_values(template: PathModelMatrices, S: np.ndarray) -> np.ndarray:
    """Equation-wise OLS slopes and residual variances from the moments."""
    p = template.p
    A = np.zeros((p, p))
    for f in template.free:
        if f.matrix == "A":
            A[f.row, f.col] = 1.0
    theta = []
    residual_var = np.diag(S).copy()
    slopes = np.zeros((p, p))
    for i in range(p):
        preds = np.flatnonzero(A[i])
        if preds.size:
            b = linalg.solve(S[np.ix_(preds, preds)], S[preds, i], assume_a="pos")
            slopes[i, preds] = b
            residual_var[i] = max(S[i, i] - S[i, preds] @ b, 1e-6 * S[i, i])
    for f in template.free:
        if f.matrix == "A":
            theta.append(slopes[f.row, f.col])
        elif f.row == f.col:
            theta.append(residual_var[f.row])
        else:
            theta.append(S[f.row, f.col])
    return np.asarray(theta, dtype=float)


def degrees_of_freedom(spec: ModelSpec) -> int:
    """Distinct moments minus free parameters."""
    p = len(spec.variables)
    free = len(spec.arrows) + p + len(spec.covariances)
    return p * (p + 1) // 2 - free


def fit_ml(
    spec: ModelSpec,
    moments: SampleMoments,
    max_iter: int = 500,
    grad_tol: float = 1e-8,
    ftol: float = 1e-12,
) -> PathFitResult:
    """Maximum-likelihood fit of a recursive path model to sample moments."""
    validate_against_columns(spec, moments.columns)
    df = degrees_of_freedom(spec)
    if df < 0:
        raise UnderIdentifiedError(df)
    sub = moments.subset(spec.variables)
    template = build_matrices(spec)
    objective = MLDiscrepancy(template, sub.cov)
    theta0 = starting_values(template, sub.cov)

    state = {"iterations": 0}
    history = []

    def callback(xk):
        state["iterations"] += 1
        history.append(objective.value(xk))

    result = optimize.minimize(
        objective.value,
        theta0,
        jac=objective.gradient,
        method="BFGS",
        callback=callback,
        options={"gtol": grad_tol, "maxiter": max_iter, "norm": np.inf},
    )
    theta = result.x
    f_min = float(objective.value(theta))
    grad_norm = float(np.max(np.abs(objective.gradient(theta)))) if theta.size else 0.0
    small_change = (
        len(history) >= 2 and abs(history[-1] - history[-2]) <= ftol * max(1.0, abs(history[-2]))
    )
    converged = bool(result.success or grad_norm < OPTIMALITY_TOL or small_change)
    if not np.isfinite(f_min) or not converged:
        raise NonConvergenceError(state["iterations"], grad_norm, result.message)
    # saturated recursive models reproduce S exactly; round-off can leave F slightly negative
    f_min = max(f_min, 0.0)

    mats = template.with_params(theta)
    implied = implied_covariance(mats)
    chi_square = (sub.n - 1) * f_min
    stats = FitStatistics(
        chi_square=chi_square,
        df=df,
        p_value=chi2_sf(chi_square, df),
        f_min=f_min,
        n=sub.n,
        p=len(spec.variables),
        converged=converged,
        iterations=state["iterations"],
    )
    estimates = _standard_errors(objective, theta, template, sub.n)
    logger.info(
        f"ML fit converged in {stats.iterations} iterations: "
        f"chi2={stats.chi_square:.4f}, df={df}, p={stats.p_value:.4f}"
    )
    return PathFitResult(
        spec=spec,
        matrices=mats,
        theta=theta,
        estimates=estimates,
        statistics=stats,
        implied=implied,
        moments=sub,
        effects=path_effects(mats),
    )


def _standard_errors(objective, theta, template, n) -> List[ParameterEstimate]:
    se = np.full(theta.size, np.nan)
    if theta.size:
        try:
            H = objective.hessian(theta)
            cov = 2.0 / (n - 1) * linalg.inv(H)
            diag = np.diag(cov)
            se = np.where(diag > 0, np.sqrt(np.abs(diag)), np.nan)
        except (linalg.LinAlgError, ValueError):
            logger.warning("Information matrix is singular; standard errors unavailable")
    out = []
    for f, est, s in zip(template.free, theta, se):
        kind = "path" if f.matrix == "A" else ("variance" if f.row == f.col else "covariance")
        if np.isfinite(s) and s > 0:
            z = float(est / s)
            out.append(ParameterEstimate(f.label, kind, float(est), float(s), z, normal_two_sided_p(z)))
        else:
            out.append(ParameterEstimate(f.label, kind, float(est), None, None, None))
    return out


def fit_null_model(moments: SampleMoments) -> FitStatistics:
    """Independence model: variances free, covariances fixed at zero."""
    _, logdet = check_positive_definite(moments.cov)
    p = moments.cov.shape[0]
    f_null = float(np.sum(np.log(np.diag(moments.cov))) - logdet)
    f_null = max(f_null, 0.0)
    chi_square = (moments.n - 1) * f_null
    df = p * (p - 1) // 2
    return FitStatistics(
        chi_square=chi_square,
        df=df,
        p_value=chi2_sf(chi_square, df),
        f_min=f_null,
        n=moments.n,
        p=p,
    )


def path_effects(mats: PathModelMatrices, tol: float = 0.0) -> List[Dict[str, float]]:
    """Direct, indirect and total effects between every connected pair."""
    B = np.linalg.inv(np.eye(mats.p) - mats.A)
    total = B - np.eye(mats.p)
    indirect = total - mats.A
    rows = []
    for i, target in enumerate(mats.variables):
        for j, source in enumerate(mats.variables):
            if i == j or (abs(total[i, j]) <= tol and mats.A[i, j] == 0 and abs(indirect[i, j]) <= tol):
                continue
            rows.append(
                {
                    "from": source,
                    "to": target,
                    "direct": float(mats.A[i, j]),
                    "indirect": float(indirect[i, j]),
                    "total": float(total[i, j]),
                }
            )
    return rows
