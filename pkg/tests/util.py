"""Shared builders for the test suite."""

import numpy as np

from cosmic.core import EmbeddingMatrix, PairedDataset
from cosmic.knife import KnifeConfig


def make_matrix(values, ids=None) -> EmbeddingMatrix:
    values = np.asarray(values, dtype=np.float64)
    if ids is None:
        ids = tuple(f"r{i}" for i in range(values.shape[0]))
    return EmbeddingMatrix(values=values, ids=tuple(ids))


def make_pairs(t, s, ids=None) -> PairedDataset:
    t = np.asarray(t, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if ids is None:
        ids = tuple(f"r{i}" for i in range(t.shape[0]))
    return PairedDataset(
        source=EmbeddingMatrix(values=t, ids=tuple(ids)),
        summary=EmbeddingMatrix(values=s, ids=tuple(ids)),
    )


def gaussian_pairs(n, d, rho, seed) -> PairedDataset:
    """Jointly Gaussian (T, S) with per-dimension correlation rho."""
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(n, d))
    e = rng.normal(size=(n, d))
    return make_pairs(z, rho * z + np.sqrt(1.0 - rho * rho) * e)


def gaussian_mi_true(d, rho) -> float:
    return -0.5 * d * np.log(1.0 - rho * rho)


# Reduced-budget config for tests where speed matters more than tightness.
FAST = KnifeConfig(epochs=25, patience=5)
