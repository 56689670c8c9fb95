import logging
from typing import Optional, Sequence

import numpy as np
import pandas as pd


def project_pca2(X: np.ndarray) -> np.ndarray:
    """
    Project samples onto the first two principal components.

    Each component is signed so that its largest-magnitude loading is
    positive. A rank-deficient covariance yields a zero second column.
    """
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    if d < 2:
        raise ValueError(f"PCA projection needs d >= 2, got {d}")
    if n < 3:
        raise ValueError(f"PCA projection needs N >= 3, got {n}")

    centered = X - X.mean(axis=0)
    eigvals, eigvecs = np.linalg.eigh(np.cov(centered, rowvar=False))
    order = np.argsort(eigvals)[::-1][:2]
    eigvals, components = eigvals[order], eigvecs[:, order]

    for j in range(2):
        if components[np.argmax(np.abs(components[:, j])), j] < 0:
            components[:, j] *= -1

    projected = centered @ components
    if eigvals[1] <= 1e-12 * max(eigvals[0], 1.0):
        logging.warning("Covariance has rank < 2; second principal component set to zero")
        projected[:, 1] = 0.0
    return projected


def selection_frame(
    projected: np.ndarray,
    pool: Sequence[int],
    query_order: Sequence[int],
    step: Optional[int] = None,
) -> pd.DataFrame:
    """One row per pool sample: pc1, pc2, selected flag and 1-based selection step."""
    selected = list(query_order if step is None else query_order[:step])
    position = {int(index): i + 1 for i, index in enumerate(selected)}
    pool = [int(i) for i in pool]
    return pd.DataFrame(
        {
            "sample": pool,
            "pc1": projected[pool, 0],
            "pc2": projected[pool, 1],
            "selected": [int(i in position) for i in pool],
            "selection_step": pd.array([position.get(i) for i in pool], dtype="Int64"),
        }
    )
