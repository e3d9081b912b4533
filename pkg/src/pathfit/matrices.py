# src/pathfit/matrices.py
import logging
from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple

import numpy as np

from src.errors import CycleError
from src.model.dsl import ModelSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FreeParameter:
    """One free slot: ``matrix`` is "A" (directed path) or "S" (variance/covariance)."""

    matrix: str
    row: int
    col: int
    label: str

    @property
    def is_variance(self) -> bool:
        """True for a variance slot on the diagonal of S."""
        return self.matrix == "S" and self.row == self.col


@dataclass(frozen=True, eq=False)
class PathModelMatrices:
    """Directed paths A (A[i, j] is the path j -> i) and symmetric S.

    S holds exogenous variances/covariances and disturbance variances; each
    disturbance loads on its variable with a fixed coefficient of 1.
    """

    variables: Tuple[str, ...]
    A: np.ndarray
    S: np.ndarray
    free: Tuple[FreeParameter, ...]

    @property
    def p(self) -> int:
        """Number of observed variables."""
        return len(self.variables)

    def params(self) -> np.ndarray:
        """Current values of the free parameters, in slot order."""
        return np.array(
            [(self.A if f.matrix == "A" else self.S)[f.row, f.col] for f in self.free]
        )

    def with_params(self, theta: Sequence[float]) -> "PathModelMatrices":
        """Copy with the free slots set from theta."""
        A = self.A.copy()
        S = self.S.copy()
        for f, value in zip(self.free, theta):
            if f.matrix == "A":
                A[f.row, f.col] = value
            else:
                S[f.row, f.col] = value
                S[f.col, f.row] = value
        return replace(self, A=A, S=S)


def build_matrices(spec: ModelSpec) -> PathModelMatrices:
    """Zero-valued matrices with free slots in the order paths, variances, covariances."""
    names = spec.variables
    index = {name: i for i, name in enumerate(names)}
    p = len(names)
    free: List[FreeParameter] = []
    for pred, outcome in spec.arrows:
        free.append(FreeParameter("A", index[outcome], index[pred], f"{outcome}~{pred}"))
    for name in names:
        i = index[name]
        free.append(FreeParameter("S", i, i, f"{name}~~{name}"))
    for a, b in spec.covariances:
        i, j = sorted((index[a], index[b]))
        free.append(FreeParameter("S", j, i, f"{a}~~{b}"))
    return PathModelMatrices(
        variables=tuple(names), A=np.zeros((p, p)), S=np.zeros((p, p)), free=tuple(free)
    )


def _check_acyclic(A: np.ndarray, names: Sequence[str]):
    p = A.shape[0]
    pattern = A != 0
    remaining = set(range(p))
    while remaining:
        sources = [i for i in remaining if not any(pattern[i, j] for j in remaining)]
        if not sources:
            break
        remaining.difference_update(sources)
    if not remaining:
        return
    # walk predecessors inside the remaining set until a node repeats
    node = min(remaining)
    path = [node]
    while True:
        node = next(j for j in sorted(remaining) if pattern[node, j])
        if node in path:
            cycle = path[path.index(node):] + [node]
            raise CycleError([names[i] for i in reversed(cycle)])
        path.append(node)


def implied_covariance(mats: PathModelMatrices) -> np.ndarray:
    """Sigma = (I - A)^-1 S (I - A)^-T."""
    _check_acyclic(mats.A, mats.variables)
    B = np.linalg.inv(np.eye(mats.p) - mats.A)
    sigma = B @ mats.S @ B.T
    return (sigma + sigma.T) / 2.0
