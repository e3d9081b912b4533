# src/simulation/montecarlo.py
"""Seeded data generator and replication study for the single-mediator model."""

import json
import logging
from dataclasses import asdict, dataclass, fields
from functools import partial
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.data.loader import Dataset
from src.engine.replication import map_indexed, standard_normals, stream
from src.errors import (
    AllReplicationsDegenerateError,
    AllResamplesDegenerateError,
    DataIoError,
    InvalidDesignError,
    RankDeficientError,
)
from src.mediation.analysis import decompose_effects, fit_mediation
from src.mediation.inference import (
    CiMethod,
    bootstrap_ci,
    normal_ci,
    product_distribution_ci,
    sobel_se,
    z_test,
)

logger = logging.getLogger(__name__)

MAX_DEGENERATE_SHARE = 0.01
COLUMNS = ("X", "M", "Y")

_METHOD_ALIASES = {
    "normal": CiMethod.NORMAL,
    "bootstrap": CiMethod.BOOTSTRAP,
    "product": CiMethod.PRODUCT,
    "productdistribution": CiMethod.PRODUCT,
}


def parse_method(name: str) -> CiMethod:
    """Interval method from a name or alias such as product_distribution."""
    key = str(name).replace("_", "").replace("-", "").lower()
    try:
        return _METHOD_ALIASES[key]
    except KeyError:
        raise InvalidDesignError(f"unknown interval method {name!r}") from None


@dataclass(frozen=True)
class SimulationDesign:
    a: float
    b: float
    tau_prime: float
    n: int
    R: int
    seed: int
    sd_x: float = 1.0
    sd_e2: float = 1.0
    sd_e1: float = 1.0
    level: float = 0.95
    methods: Tuple[CiMethod, ...] = (CiMethod.NORMAL,)
    B: int = 2000
    draws: int = 100_000

    def __post_init__(self):
        for name in ("sd_x", "sd_e2", "sd_e1"):
            if not getattr(self, name) > 0:
                raise InvalidDesignError(f"{name} must be positive")
        if self.n < 10:
            raise InvalidDesignError("n must be at least 10")
        if self.R < 1:
            raise InvalidDesignError("R must be at least 1")
        if not (0.0 < self.level < 1.0):
            raise InvalidDesignError("level must lie in (0, 1)")
        if self.seed is None:
            raise InvalidDesignError("an explicit seed is required")
        methods = tuple(m if isinstance(m, CiMethod) else parse_method(m) for m in self.methods)
        object.__setattr__(self, "methods", methods)

    @property
    def true_effect(self) -> float:
        """Population mediated effect a * b."""
        return self.a * self.b

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "SimulationDesign":
        """Validated design from a mapping; unknown or missing fields are errors."""
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise InvalidDesignError(f"unknown design field(s): {', '.join(sorted(unknown))}")
        missing = [name for name in ("a", "b", "tau_prime", "n", "R", "seed") if name not in raw]
        if missing:
            raise InvalidDesignError(f"missing design field(s): {', '.join(missing)}")
        values = dict(raw)
        if "methods" in values:
            values["methods"] = tuple(parse_method(m) for m in values["methods"])
        try:
            for key in ("n", "R", "seed", "B", "draws"):
                if key in values:
                    values[key] = int(values[key])
            for key in ("a", "b", "tau_prime", "sd_x", "sd_e2", "sd_e1", "level"):
                if key in values:
                    values[key] = float(values[key])
        except (TypeError, ValueError) as e:
            raise InvalidDesignError(f"bad design value: {e}") from e
        return cls(**values)

    @classmethod
    def from_json(cls, path) -> "SimulationDesign":
        """Validated design from a JSON file."""
        try:
            with open(path, "r", encoding="utf-8-sig") as f:
                raw = json.load(f)
        except OSError as e:
            raise DataIoError(f"cannot read design file {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise InvalidDesignError(f"design file {path} is not valid JSON: {e}") from e
        if not isinstance(raw, dict):
            raise InvalidDesignError("design must be a JSON object")
        return cls.from_dict(raw)

    def as_dict(self) -> Dict[str, Any]:
        """Plain mapping with method names as strings."""
        out = asdict(self)
        out["methods"] = [m.value for m in self.methods]
        return out


@dataclass(frozen=True)
class EstimatorSummary:
    mean: float
    bias: float
    empirical_sd: float
    mean_se: float
    se_relative_bias: Optional[float]


@dataclass(frozen=True)
class MethodSummary:
    coverage: float
    miss_below: float
    miss_above: float
    rejection_rate: float
    mean_width: float
    used: int


@dataclass(frozen=True)
class SimulationReport:
    design: SimulationDesign
    true_effect: float
    replications_requested: int
    replications_used: int
    skipped: int
    estimators: Dict[str, EstimatorSummary]
    methods: Dict[str, MethodSummary]
    sobel_rejection_rate: float
    max_identity_error: float

    def as_dict(self) -> Dict[str, Any]:
        """Plain mapping of the whole report."""
        out = asdict(self)
        out["design"] = self.design.as_dict()
        return out


def generate_dataset(design: SimulationDesign, replication_index: int) -> Dataset:
    """X ~ N(0, sd_x^2); M = a X + e2; Y = tau' X + b M + e1."""
    rng = stream(design.seed, replication_index)
    z = standard_normals(rng, (3, design.n))
    x = design.sd_x * z[0]
    m = design.a * x + design.sd_e2 * z[1]
    y = design.tau_prime * x + design.b * m + design.sd_e1 * z[2]
    return Dataset(COLUMNS, np.column_stack([x, m, y]))


def _derived_seed(seed: int, index: int, purpose: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(index), purpose]).generate_state(1)[0])


def _replicate(index: int, design: SimulationDesign) -> Optional[Dict[str, Any]]:
    data = generate_dataset(design, index)
    try:
        fit = fit_mediation(data, *COLUMNS)
    except RankDeficientError:
        return None
    dec = decompose_effects(fit)
    se = sobel_se(fit)
    record: Dict[str, Any] = {
        "product": dec.indirect_product,
        "difference": dec.indirect_difference,
        "total": dec.total_eq1,
        "se": se,
        "sobel_reject": bool(se > 0 and z_test(dec.indirect_product, se).p < 1.0 - design.level),
        "intervals": {},
    }
    for method in design.methods:
        try:
            if method is CiMethod.NORMAL:
                ci = normal_ci(dec.indirect_product, se, design.level)
            elif method is CiMethod.BOOTSTRAP:
                ci = bootstrap_ci(
                    data, *COLUMNS, B=design.B, seed=_derived_seed(design.seed, index, 1), level=design.level
                )
            else:
                ci = product_distribution_ci(
                    fit, draws=design.draws, seed=_derived_seed(design.seed, index, 2), level=design.level
                )
        except (RankDeficientError, AllResamplesDegenerateError):
            return None
        record["intervals"][method.value] = (ci.lower, ci.upper)
    return record


def _summarize_estimator(values: np.ndarray, ses: np.ndarray, truth: float) -> EstimatorSummary:
    mean = float(np.mean(values))
    sd = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    mean_se = float(np.mean(ses))
    return EstimatorSummary(
        mean=mean,
        bias=mean - truth,
        empirical_sd=sd,
        mean_se=mean_se,
        se_relative_bias=mean_se / sd - 1.0 if sd > 0 else None,
    )


def _summarize_method(limits: List[Tuple[float, float]], truth: float) -> MethodSummary:
    arr = np.asarray(limits, dtype=float)
    lower, upper = arr[:, 0], arr[:, 1]
    count = arr.shape[0]
    below = int(np.sum(truth < lower))
    above = int(np.sum(truth > upper))
    covered = count - below - above
    rejected = int(np.sum((lower > 0) | (upper < 0)))
    return MethodSummary(
        coverage=covered / count,
        miss_below=below / count,
        miss_above=above / count,
        rejection_rate=rejected / count,
        mean_width=float(np.mean(upper - lower)),
        used=count,
    )


def run_study(design: SimulationDesign, workers: int = 1) -> SimulationReport:
    """Replicate, fit and aggregate. Results do not depend on ``workers``."""
    logger.info(
        f"Running {design.R} replications (n={design.n}, methods="
        f"{', '.join(m.value for m in design.methods)}) on {workers} worker(s)"
    )
    records = map_indexed(partial(_replicate, design=design), range(design.R), workers=workers)
    used = [r for r in records if r is not None]
    skipped = design.R - len(used)
    if not used or skipped > MAX_DEGENERATE_SHARE * design.R:
        raise AllReplicationsDegenerateError(
            f"{skipped} of {design.R} replications were degenerate"
        )
    if skipped:
        logger.warning(f"Skipped {skipped} degenerate replication(s)")

    truth = design.true_effect
    product = np.array([r["product"] for r in used])
    difference = np.array([r["difference"] for r in used])
    ses = np.array([r["se"] for r in used])
    total = np.array([r["total"] for r in used])
    scale = np.maximum(np.maximum(np.abs(product), np.abs(total)), 1e-12)
    identity_error = float(np.max(np.abs(difference - product) / scale))

    methods = {
        method.value: _summarize_method([r["intervals"][method.value] for r in used], truth)
        for method in design.methods
    }
    report = SimulationReport(
        design=design,
        true_effect=truth,
        replications_requested=design.R,
        replications_used=len(used),
        skipped=skipped,
        estimators={
            "product": _summarize_estimator(product, ses, truth),
            "difference": _summarize_estimator(difference, ses, truth),
        },
        methods=methods,
        sobel_rejection_rate=float(np.mean([r["sobel_reject"] for r in used])),
        max_identity_error=identity_error,
    )
    logger.info(
        f"Study done: {len(used)} replications, bias={report.estimators['product'].bias:.3g}"
    )
    return report
