from dataclasses import dataclass, field
from typing import List, Optional, Set

import numpy as np

from backend.clustering import DEFAULT_MAX_ITER, DEFAULT_RESTARTS
from backend.data import Dataset
from backend.regression import DEFAULT_SIGMA


class StrategyError(ValueError):
    """Exception raised when a selection request cannot be honoured."""


@dataclass
class PoolState:
    """
    State of one active-learning run over a candidate pool.

    `pool` holds the dataset indices that may ever be queried (the training
    split). Labels always come from `dataset.y`, the oracle.
    """
    dataset: Dataset
    rng: np.random.Generator
    pool: Optional[np.ndarray] = None
    labeled: List[int] = field(default_factory=list)
    labels: List[float] = field(default_factory=list)
    excluded: Set[int] = field(default_factory=set)
    sigma: float = DEFAULT_SIGMA
    kmeans_restarts: int = DEFAULT_RESTARTS
    kmeans_max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        if self.pool is None:
            self.pool = np.arange(self.dataset.N)
        self.pool = np.sort(np.asarray(self.pool, dtype=int))

    @property
    def X(self) -> np.ndarray:
        return self.dataset.X

    @property
    def d(self) -> int:
        return self.dataset.d

    def active(self) -> np.ndarray:
        """Pool indices that are not excluded, labeled or not."""
        if not self.excluded:
            return self.pool
        return self.pool[~np.isin(self.pool, list(self.excluded))]

    def unlabeled(self) -> np.ndarray:
        """Selectable indices in ascending order."""
        active = self.active()
        if not self.labeled:
            return active
        return active[~np.isin(active, self.labeled)]

    def labeled_X(self) -> np.ndarray:
        return self.X[self.labeled]

    def labeled_y(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=float)

    def query(self, index: int) -> float:
        index = int(index)
        if index in self.excluded:
            raise StrategyError(f"Sample {index} is excluded from selection")
        if index in self.labeled:
            raise StrategyError(f"Sample {index} is already labeled")
        if not np.any(self.pool == index):
            raise StrategyError(f"Sample {index} is not in the pool")
        label = float(self.dataset.y[index])
        self.labeled.append(index)
        self.labels.append(label)
        return label
