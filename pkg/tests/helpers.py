# tests/helpers.py
import numpy as np

from src.data.loader import dataset_from_columns


def _residualize(noise, *columns):
    Z = np.column_stack([np.ones(noise.shape[0]), *columns])
    coef, *_ = np.linalg.lstsq(Z, noise, rcond=None)
    return noise - Z @ coef


def exact_data(a, b, tau, n=300, seed=1):
    """Data whose OLS paths equal (a, b, tau) up to round-off."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    m = a * x + _residualize(rng.normal(size=n), x)
    y = tau * x + b * m + _residualize(rng.normal(size=n), x, m)
    return dataset_from_columns(("X", "M", "Y"), x, m, y)
