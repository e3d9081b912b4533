# src/engine/replication.py
"""Seeded random streams and an order-preserving replicate runner.

Every stochastic operation draws from a stream keyed by (seed, index), so
results do not depend on how replicates are spread over workers.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Sequence, TypeVar

import numpy as np
from scipy import special

logger = logging.getLogger(__name__)

T = TypeVar("T")

# rng.random() yields multiples of 2**-53 in [0, 1); shifting by half a step
# keeps uniforms strictly inside (0, 1) so the inverse CDF stays finite.
_HALF_ULP = 2.0**-54


def stream(seed: int, index: int = 0, purpose: int = 0) -> np.random.Generator:
    """Independent generator for replicate ``index`` of master ``seed``."""
    if seed is None:
        raise ValueError("an explicit seed is required")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(purpose), int(index)])))


def standard_normals(rng: np.random.Generator, size) -> np.ndarray:
    """Standard normal variates by inverse-CDF transform of uniforms."""
    return special.ndtri(rng.random(size) + _HALF_ULP)


def _run_chunk(args):
    func, items = args
    return [func(item) for item in items]


def map_indexed(func: Callable[[int], T], indices: Sequence[int], workers: int = 1) -> List[T]:
    """Apply ``func`` to each index, returning results in index order.

    With ``workers > 1`` the indices are split into contiguous chunks and run
    in a process pool; ``func`` must then be picklable.
    """
    indices = list(indices)
    if workers <= 1 or len(indices) < 2:
        return [func(i) for i in indices]
    chunk_count = min(workers * 4, len(indices))
    bounds = np.linspace(0, len(indices), chunk_count + 1).astype(int)
    chunks = [indices[lo:hi] for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    logger.debug(f"Running {len(indices)} replicates in {len(chunks)} chunks on {workers} workers")
    results: List[T] = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_run_chunk, [(func, c) for c in chunks]):
            results.extend(part)
    return results
