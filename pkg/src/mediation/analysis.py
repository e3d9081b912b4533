# src/mediation/analysis.py
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from src.data.loader import Dataset
from src.errors import ParameterError, TooFewRowsError
from src.model.dsl import VariableRole
from src.stats.distributions import check_alpha
from src.stats.ols import RANK_TOL, OlsFit, ols_fit, solve_least_squares

logger = logging.getLogger(__name__)

UNTESTABLE_ASSUMPTIONS = (
    "No unmeasured confounding of the X-M, M-Y or X-Y relations.",
    "Correct causal order X -> M -> Y (M does not cause X, Y does not cause M).",
    "Variables are measured without error.",
    "Residuals of the mediator and outcome equations are independent; "
    "the residual correlation reported here is descriptive only.",
)


class MediationOutcome(Enum):
    NO_MEDIATION = "no_mediation"
    COMPLETE = "complete_mediation"
    PARTIAL = "partial_mediation"


class Consistency(Enum):
    CONSISTENT = "consistent"
    INCONSISTENT = "inconsistent"


@dataclass(frozen=True, eq=False)
class MediationFit:
    """The three regressions of the single-mediator model.

    eq1: Y ~ X (total effect), eq2: Y ~ X + M (direct effect and b path),
    eq3: M ~ X (a path).
    """

    x: str
    m: str
    y: str
    eq1: OlsFit
    eq2: OlsFit
    eq3: OlsFit
    n: int

    @property
    def beta1(self) -> float:
        """Total effect of X on Y (equation 1)."""
        return self.eq1.coef(self.x)

    @property
    def beta2(self) -> float:
        """Direct effect of X on Y with M controlled (equation 2)."""
        return self.eq2.coef(self.x)

    @property
    def betaM(self) -> float:
        """Effect of M on Y with X controlled (equation 2)."""
        return self.eq2.coef(self.m)

    @property
    def beta3(self) -> float:
        """Effect of X on M (equation 3)."""
        return self.eq3.coef(self.x)

    @property
    def se_beta1(self) -> float:
        return self.eq1.se_of(self.x)

    @property
    def se_beta2(self) -> float:
        return self.eq2.se_of(self.x)

    @property
    def se_betaM(self) -> float:
        return self.eq2.se_of(self.m)

    @property
    def se_beta3(self) -> float:
        return self.eq3.se_of(self.x)

    def coefficients(self) -> Dict[str, Dict[str, float]]:
        """Estimate, se, t and p for each of the four named paths."""
        rows = {
            "beta1": (self.eq1, self.x),
            "beta2": (self.eq2, self.x),
            "betaM": (self.eq2, self.m),
            "beta3": (self.eq3, self.x),
        }
        return {
            key: {
                "estimate": eq.coef(name),
                "se": eq.se_of(name),
                "t": eq.t_of(name),
                "p": eq.p_of(name),
            }
            for key, (eq, name) in rows.items()
        }

    def standardized(self, data: Dataset) -> Dict[str, float]:
        """Paths rescaled by sd(predictor) / sd(outcome)."""
        sd = {name: float(np.std(data.column(name), ddof=1)) for name in (self.x, self.m, self.y)}

        def scale(value, pred, out):
            return value * sd[pred] / sd[out] if sd[out] > 0 else float("nan")

        return {
            "beta1": scale(self.beta1, self.x, self.y),
            "beta2": scale(self.beta2, self.x, self.y),
            "betaM": scale(self.betaM, self.m, self.y),
            "beta3": scale(self.beta3, self.x, self.m),
        }


@dataclass(frozen=True)
class EffectDecomposition:
    direct: float
    indirect_product: float
    indirect_difference: float
    total_eq1: float
    total_composed: float
    proportion_mediated: Optional[float] = None
    ratio_indirect_direct: Optional[float] = None


@dataclass(frozen=True)
class CausalStepsVerdict:
    step_results: Tuple[bool, bool, bool, bool]
    alpha: float
    outcome: MediationOutcome
    failed_step: Optional[int]
    consistency: Consistency
    note: str = ""


@dataclass(frozen=True)
class AssumptionReport:
    interaction_coef: float
    interaction_se: float
    interaction_t: float
    interaction_p: float
    interaction_significant: bool
    residual_correlation: float
    alpha: float
    untestable: Tuple[str, ...] = field(default=UNTESTABLE_ASSUMPTIONS)


def _check_names(data: Dataset, x: str, m: str, y: str):
    if len({x, m, y}) != 3:
        raise ParameterError("x, m and y must name three distinct columns")
    for name in (x, m, y):
        data.column(name)


def fit_mediation(
    data: Dataset, x: str, m: str, y: str, rank_tol: float = RANK_TOL
) -> MediationFit:
    """Fit Y~X (1), Y~X+M (2) and M~X (3) by OLS."""
    _check_names(data, x, m, y)
    if data.n < 5:
        raise TooFewRowsError(data.n, required=5)
    xv, mv, yv = data.column(x), data.column(m), data.column(y)
    eq1 = ols_fit(yv, xv[:, None], names=(x,), rank_tol=rank_tol)
    eq2 = ols_fit(yv, np.column_stack([xv, mv]), names=(x, m), rank_tol=rank_tol)
    eq3 = ols_fit(mv, xv[:, None], names=(x,), rank_tol=rank_tol)
    fit = MediationFit(x=x, m=m, y=y, eq1=eq1, eq2=eq2, eq3=eq3, n=data.n)
    logger.debug(
        f"Mediation fit {x} -> {m} -> {y}: a={fit.beta3:.4g}, b={fit.betaM:.4g}, "
        f"c'={fit.beta2:.4g}, c={fit.beta1:.4g}"
    )
    return fit


def indirect_effect(xv: np.ndarray, mv: np.ndarray, yv: np.ndarray) -> float:
    """a*b from Eqs (3) and (2) without standard errors; used by resampling."""
    a = solve_least_squares(mv, xv[:, None])[0][1]
    b = solve_least_squares(yv, np.column_stack([xv, mv]))[0][2]
    return float(a * b)


def decompose_effects(fit: MediationFit, tol: float = 1e-12) -> EffectDecomposition:
    """Direct, mediated and total effects with their ratios."""
    direct = fit.beta2
    indirect = fit.beta3 * fit.betaM
    total = fit.beta1
    return EffectDecomposition(
        direct=direct,
        indirect_product=indirect,
        indirect_difference=fit.beta1 - fit.beta2,
        total_eq1=total,
        total_composed=direct + indirect,
        proportion_mediated=indirect / total if abs(total) > tol else None,
        ratio_indirect_direct=indirect / direct if abs(direct) > tol else None,
    )


def classify_consistency(dec: EffectDecomposition, tol: float = 1e-8) -> Consistency:
    """Inconsistent when direct and mediated effects differ in sign."""
    if tol < 0:
        raise ParameterError("tol must be non-negative")
    ind, direct = dec.indirect_product, dec.direct
    if abs(ind) > tol and abs(direct) > tol and np.sign(ind) != np.sign(direct):
        return Consistency.INCONSISTENT
    return Consistency.CONSISTENT


def causal_steps(fit: MediationFit, alpha: float = 0.05, tol: float = 1e-8) -> CausalStepsVerdict:
    """Four-step causal procedure with complete/partial classification."""
    check_alpha(alpha)
    step1 = fit.eq1.p_of(fit.x) < alpha
    step2 = fit.eq3.p_of(fit.x) < alpha
    step3 = fit.eq2.p_of(fit.m) < alpha
    step4 = abs(fit.beta1) > abs(fit.beta2)
    direct_significant = fit.eq2.p_of(fit.x) < alpha
    consistency = classify_consistency(decompose_effects(fit), tol)

    failed = None
    note = ""
    if not step1:
        failed = 1
        note = (
            "Total effect of X on Y is not significant. Mediation may still be "
            "present when direct and mediated effects cancel (suppression)."
        )
        if consistency is Consistency.INCONSISTENT:
            note += " Direct and indirect effects have opposite signs here."
    elif not step2:
        failed = 2
        note = "X does not significantly predict M."
    elif not step3:
        failed = 3
        note = "M does not significantly predict Y when X is controlled."
    elif not direct_significant:
        note = "Direct effect is not significant once M is controlled."
    elif not step4:
        failed = 4
        note = "Coefficient of X does not shrink in magnitude when M enters."
    else:
        note = "Direct effect remains significant but shrinks when M enters."

    if failed is not None:
        outcome = MediationOutcome.NO_MEDIATION
    elif not direct_significant:
        outcome = MediationOutcome.COMPLETE
    else:
        outcome = MediationOutcome.PARTIAL

    return CausalStepsVerdict(
        step_results=(step1, step2, step3, step4),
        alpha=alpha,
        outcome=outcome,
        failed_step=failed,
        consistency=consistency,
        note=note,
    )


def check_assumptions(fit: MediationFit, data: Dataset, alpha: float = 0.05) -> AssumptionReport:
    """XM interaction test in the outcome equation plus residual correlation."""
    check_alpha(alpha)
    xv, mv, yv = data.column(fit.x), data.column(fit.m), data.column(fit.y)
    xm_name = f"{fit.x}:{fit.m}"
    augmented = ols_fit(
        yv, np.column_stack([xv, mv, xv * mv]), names=(fit.x, fit.m, xm_name)
    )
    r2, r3 = fit.eq2.residuals, fit.eq3.residuals
    denom = np.sqrt((r2 @ r2) * (r3 @ r3))
    corr = float(r2 @ r3 / denom) if denom > 0 else 0.0
    p = augmented.p_of(xm_name)
    return AssumptionReport(
        interaction_coef=augmented.coef(xm_name),
        interaction_se=augmented.se_of(xm_name),
        interaction_t=augmented.t_of(xm_name),
        interaction_p=p,
        interaction_significant=p < alpha,
        residual_correlation=corr,
        alpha=alpha,
    )


def sample_size_advisory(roles: Mapping[str, VariableRole], n: int) -> List[str]:
    """Sample-size warnings for mediation models."""
    mediators = sum(1 for role in roles.values() if role is VariableRole.MEDIATOR)
    warnings: List[str] = []
    if mediators == 1 and n < 50:
        warnings.append(
            f"n = {n} is below 50, the minimum for low-bias standard errors "
            "in single-mediator models."
        )
    elif mediators >= 2 and n < 100:
        warnings.append(
            f"n = {n} is below 100 for a model with {mediators} mediators; "
            "100 to 200 observations are recommended (200 is the upper guidance bound)."
        )
    for msg in warnings:
        logger.warning(msg)
    return warnings


def triangle_roles(fit: MediationFit) -> Dict[str, VariableRole]:
    """Roles of the three triangle variables."""
    return {
        fit.x: VariableRole.EXOGENOUS,
        fit.m: VariableRole.MEDIATOR,
        fit.y: VariableRole.ENDOGENOUS,
    }
