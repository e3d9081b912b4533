from .analysis import (
    CausalStepsVerdict,
    Consistency,
    EffectDecomposition,
    MediationFit,
    MediationOutcome,
    causal_steps,
    check_assumptions,
    classify_consistency,
    decompose_effects,
    fit_mediation,
    sample_size_advisory,
)
from .inference import (
    CiMethod,
    IntervalEstimate,
    bootstrap_ci,
    normal_ci,
    product_distribution_ci,
    sobel_se,
    sobel_test,
)

__all__ = [
    "CausalStepsVerdict",
    "CiMethod",
    "Consistency",
    "EffectDecomposition",
    "IntervalEstimate",
    "MediationFit",
    "MediationOutcome",
    "bootstrap_ci",
    "causal_steps",
    "check_assumptions",
    "classify_consistency",
    "decompose_effects",
    "fit_mediation",
    "normal_ci",
    "product_distribution_ci",
    "sample_size_advisory",
    "sobel_se",
    "sobel_test",
]
