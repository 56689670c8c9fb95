import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from backend.data import Dataset
from backend.regression import RidgeModel, predict


@dataclass(frozen=True)
class MetricPair:
    rmse: float
    # NaN when either vector is constant
    cc: float

    @property
    def cc_defined(self) -> bool:
        return not math.isnan(self.cc)


def split_pool(dataset: Dataset, train_fraction: float, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Random train pool of floor(train_fraction * N) samples; the rest is the inductive test set."""
    n = dataset.N
    if n < 5:
        raise ValueError(f"Need at least 5 samples to split, got {n}")
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n_train = int(math.floor(train_fraction * n))
    if n_train >= n:
        raise ValueError("Split leaves an empty test set")
    if n_train < 1:
        raise ValueError("Split leaves an empty training pool")
    order = rng.permutation(n)
    return np.sort(order[:n_train]), np.sort(order[n_train:])


def compute_budget(pool_size: int, budget_fraction: float, bounds: Sequence[int]) -> int:
    low, high = bounds
    if pool_size < low:
        raise ValueError(f"Pool of {pool_size} samples is smaller than the minimum budget {low}")
    # round half up, not to even
    raw = int(math.floor(budget_fraction * pool_size + 0.5))
    return min(max(raw, low), high)


def correlation(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        return math.nan
    return float(np.clip(np.corrcoef(a, b)[0, 1], -1.0, 1.0))


def rmse(a: np.ndarray, b: np.ndarray) -> float:
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return float(math.sqrt(float(np.mean(diff ** 2))))


def transductive_metrics(dataset: Dataset, pool: np.ndarray, labeled: Sequence[int], model: RidgeModel) -> MetricPair:
    """
    RMSE and CC over the whole training pool, with true labels on the
    queried samples and model predictions everywhere else.
    """
    pool = np.asarray(pool, dtype=int)
    if len(labeled) == 0:
        raise ValueError("transductive_metrics needs at least one labeled sample")
    known = np.isin(pool, labeled)
    if known.sum() != len(set(labeled)):
        raise ValueError("Labeled samples must belong to the pool")

    y_true = dataset.y[pool]
    y_mixed = predict(model, dataset.X[pool])
    y_mixed[known] = y_true[known]
    return MetricPair(rmse=rmse(y_true, y_mixed), cc=correlation(y_true, y_mixed))


def inductive_metrics(dataset: Dataset, test: np.ndarray, model: RidgeModel) -> MetricPair:
    test = np.asarray(test, dtype=int)
    if test.size == 0:
        raise ValueError("inductive_metrics needs a nonempty test set")
    y_true = dataset.y[test]
    y_pred = predict(model, dataset.X[test])
    return MetricPair(rmse=rmse(y_true, y_pred), cc=correlation(y_true, y_pred))
