from .estimator import FitStatistics, PathFitResult, fit_ml, fit_null_model, path_effects
from .indices import FitIndices, IndexVerdict, Verdict, compute_indices, index_verdicts
from .matrices import PathModelMatrices, build_matrices, implied_covariance

__all__ = [
    "FitIndices",
    "FitStatistics",
    "IndexVerdict",
    "PathFitResult",
    "PathModelMatrices",
    "Verdict",
    "build_matrices",
    "compute_indices",
    "fit_ml",
    "fit_null_model",
    "implied_covariance",
    "index_verdicts",
    "path_effects",
]
