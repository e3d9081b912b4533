# src/pathfit/indices.py
import logging
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Dict, List, Optional

import numpy as np

from src.data.loader import SampleMoments
from src.pathfit.estimator import FitStatistics

logger = logging.getLogger(__name__)


class Verdict(Enum):
    GOOD = "good"
    ACCEPTABLE = "acceptable"
    POOR = "poor"
    NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class FitIndices:
    """Absolute and incremental fit measures. ``None`` means not applicable."""

    cmin_df: Optional[float]
    gfi: Optional[float]
    agfi: Optional[float]
    rmr: float
    rmsea: Optional[float]
    nfi: Optional[float]
    tli: Optional[float]
    cfi: float
    null_chi_square: float
    null_df: int
    srmr: Optional[float] = None
    gfi_classical: Optional[float] = None
    agfi_classical: Optional[float] = None

    def as_dict(self) -> Dict[str, Optional[float]]:
        """Index values keyed by name."""
        return asdict(self)


@dataclass(frozen=True)
class IndexVerdict:
    index: str
    value: Optional[float]
    verdict: Verdict
    threshold: str
    note: str = ""


def _noncentrality(chi_square: float, df: int) -> float:
    return max(chi_square - df, 0.0)


def compute_indices(
    target: FitStatistics,
    null: FitStatistics,
    moments: SampleMoments,
    implied: np.ndarray,
) -> FitIndices:
    """Fit indices from target/null statistics and the residual covariances.

    ``moments`` and ``implied`` must cover the same variables in the same order.
    """
    chi, df, n = target.chi_square, target.df, target.n
    chi_null, df_null = null.chi_square, null.df

    cmin_df = chi / df if df > 0 else None

    # chi-square ratio form of GFI, clamped to [0, 1]
    num = _noncentrality(chi, df) / n
    den = _noncentrality(chi_null, df_null) / n
    if den > 0:
        gfi = min(max(1.0 - num / den, 0.0), 1.0)
    else:
        gfi = 1.0 if num == 0 else 0.0
    agfi = 1.0 - (1.0 - gfi) * (df_null / df) if df > 0 else None

    S = moments.cov
    resid = S - implied
    p = S.shape[0]
    upper = np.triu_indices(p)
    moments_count = p * (p + 1) / 2.0
    rmr = float(np.sqrt(np.sum(resid[upper] ** 2) / moments_count))
    sd = np.sqrt(np.diag(S))
    srmr = None
    if np.all(sd > 0):
        std_resid = resid / np.outer(sd, sd)
        srmr = float(np.sqrt(np.sum(std_resid[upper] ** 2) / moments_count))

    rmsea = float(np.sqrt(_noncentrality(chi, df) / ((n - 1) * df))) if df > 0 else None
    nfi = (chi_null - chi) / chi_null if chi_null > 0 else None

    tli = None
    if df > 0 and df_null > 0:
        null_ratio = chi_null / df_null
        if null_ratio != 1.0:
            tli = (null_ratio - chi / df) / (null_ratio - 1.0)

    cfi_den = max(chi - df, chi_null - df_null, 0.0)
    cfi = 1.0 if cfi_den == 0 else 1.0 - _noncentrality(chi, df) / cfi_den
    cfi = min(max(cfi, 0.0), 1.0)

    gfi_classical = agfi_classical = None
    try:
        inv = np.linalg.inv(implied)
        ratio = inv @ S
        dev = ratio - np.eye(p)
        gfi_classical = float(1.0 - np.trace(dev @ dev) / np.trace(ratio @ ratio))
        if df > 0:
            agfi_classical = 1.0 - (p * (p + 1) / (2.0 * df)) * (1.0 - gfi_classical)
    except np.linalg.LinAlgError:
        logger.warning("Implied covariance is singular; classical GFI not computed")

    return FitIndices(
        cmin_df=cmin_df,
        gfi=gfi,
        agfi=agfi,
        rmr=rmr,
        rmsea=rmsea,
        nfi=nfi,
        tli=tli,
        cfi=cfi,
        null_chi_square=chi_null,
        null_df=df_null,
        srmr=srmr,
        gfi_classical=gfi_classical,
        agfi_classical=agfi_classical,
    )


def _at_least(name, value, cutoff=0.90) -> IndexVerdict:
    if value is None:
        return IndexVerdict(name, None, Verdict.NOT_APPLICABLE, f">= {cutoff:.2f}")
    verdict = Verdict.GOOD if value >= cutoff else Verdict.POOR
    return IndexVerdict(name, value, verdict, f">= {cutoff:.2f}")


def _cmin_df_verdict(value) -> IndexVerdict:
    threshold = "liberal <= 5; conservative < 2 (2-3 borderline)"
    if value is None:
        return IndexVerdict("cmin_df", None, Verdict.NOT_APPLICABLE, threshold, "df = 0")
    liberal = "adequate" if value <= 5.0 else "not acceptable"
    if value < 2.0:
        conservative = "acceptable"
    elif value <= 3.0:
        conservative = "borderline"
    else:
        conservative = "not acceptable"
    if value < 2.0:
        verdict = Verdict.GOOD
    elif value <= 5.0:
        verdict = Verdict.ACCEPTABLE
    else:
        verdict = Verdict.POOR
    note = f"liberal reading: {liberal}; conservative reading: {conservative}"
    return IndexVerdict("cmin_df", value, verdict, threshold, note)


def _rmsea_verdict(value) -> IndexVerdict:
    threshold = "<= 0.05 close; 0.05-0.08 acceptable; > 0.08 poor"
    if value is None:
        return IndexVerdict("rmsea", None, Verdict.NOT_APPLICABLE, threshold, "df = 0")
    if value <= 0.05:
        return IndexVerdict("rmsea", value, Verdict.GOOD, threshold, "close fit")
    if value <= 0.08:
        return IndexVerdict("rmsea", value, Verdict.ACCEPTABLE, threshold)
    return IndexVerdict("rmsea", value, Verdict.POOR, threshold)


def index_verdicts(idx: FitIndices) -> List[IndexVerdict]:
    """Map every index to good / acceptable / poor / not-applicable."""
    verdicts = [
        _cmin_df_verdict(idx.cmin_df),
        _at_least("gfi", idx.gfi),
        _at_least("agfi", idx.agfi),
        IndexVerdict(
            "rmr", idx.rmr, Verdict.NOT_APPLICABLE, "smaller is better", "no cutoff applied"
        ),
        _rmsea_verdict(idx.rmsea),
        _at_least("nfi", idx.nfi),
        _at_least("tli", idx.tli),
        _at_least("cfi", idx.cfi),
    ]
    if idx.srmr is not None:
        verdicts.append(
            IndexVerdict(
                "srmr", idx.srmr, Verdict.NOT_APPLICABLE, "smaller is better", "no cutoff applied"
            )
        )
    verdicts.append(_at_least("gfi_classical", idx.gfi_classical))
    verdicts.append(_at_least("agfi_classical", idx.agfi_classical))
    return verdicts
