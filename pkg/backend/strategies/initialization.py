import logging
from typing import List, Tuple

import numpy as np

from backend.clustering import Clustering, closest_to_centroid, kmeans
from backend.strategies.pool import PoolState, StrategyError


def init_random(pool: PoolState, d: int) -> List[int]:
    candidates = pool.unlabeled()
    if d > candidates.size:
        raise StrategyError(f"Cannot draw {d} initial samples from {candidates.size} candidates")
    return [int(i) for i in pool.rng.choice(candidates, size=d, replace=False)]


def centroid_representatives(clustering: Clustering, indices: np.ndarray, X: np.ndarray) -> List[int]:
    """One member per cluster, closest to its centroid, in cluster order."""
    chosen: List[int] = []
    for cluster in range(clustering.k):
        members = indices[clustering.members(cluster)]
        chosen.append(closest_to_centroid(members, X, clustering.centroids[cluster]))
    return chosen


def rd_initialize(pool: PoolState, d: int) -> List[int]:
    active = pool.active()
    if d < 1 or d > active.size:
        raise StrategyError(f"Cannot initialize {d} samples from a pool of {active.size}")
    clustering = kmeans(pool.X[active], d, pool.rng, pool.kmeans_restarts, pool.kmeans_max_iter)
    return centroid_representatives(clustering, active, pool.X)


def ebmalr_outlier_filter(pool: PoolState, d: int, gamma: float) -> Tuple[np.ndarray, Clustering]:
    """
    Repeatedly cluster the surviving samples into d groups and drop every
    cluster with at most max(1, gamma * N) members, N being the original
    pool size. Dropped samples are added to `pool.excluded`.
    """
    if not 0 <= gamma < 0.5:
        raise StrategyError(f"gamma must be in [0, 0.5), got {gamma}")
    survivors = pool.active()
    if d > survivors.size:
        raise StrategyError(f"Pool of {survivors.size} samples is smaller than d={d}")
    threshold = max(1.0, gamma * survivors.size)

    while True:
        if survivors.size < d:
            raise StrategyError(
                f"Outlier filtering left {survivors.size} samples, fewer than d={d}; lower gamma"
            )
        clustering = kmeans(pool.X[survivors], d, pool.rng, pool.kmeans_restarts, pool.kmeans_max_iter)
        small = np.flatnonzero((clustering.sizes > 0) & (clustering.sizes <= threshold))
        if small.size == 0:
            break
        removed = survivors[np.isin(clustering.assignments, small)]
        logging.debug("EBMALR pass removed %d samples in %d clusters", removed.size, small.size)
        pool.excluded.update(int(i) for i in removed)
        survivors = np.setdiff1d(survivors, removed)

    return survivors, clustering
