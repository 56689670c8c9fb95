"""Seeded k-means (k-means++ seeding, Lloyd iterations, best-of-restarts)."""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

DEFAULT_RESTARTS = 10
DEFAULT_MAX_ITER = 300


@dataclass(frozen=True, eq=False)
class Clustering:
    k: int
    assignments: np.ndarray
    centroids: np.ndarray
    sizes: np.ndarray
    sse: float

    def members(self, cluster: int) -> np.ndarray:
        """Row positions (into the clustered matrix) assigned to `cluster`."""
        return np.flatnonzero(self.assignments == cluster)


def _sq_distances(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return cdist(X, centroids, "sqeuclidean")


def _assign(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # argmin keeps the first minimum, i.e. the lowest centroid index on ties
    return np.argmin(_sq_distances(X, centroids), axis=1)


def _sse(X: np.ndarray, centroids: np.ndarray, assignments: np.ndarray) -> float:
    return float(((X - centroids[assignments]) ** 2).sum())


def _seed_plusplus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    closest = _sq_distances(X, X[chosen]).ravel()
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            # every point coincides with a centre already
            remaining = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(remaining))
        chosen.append(nxt)
        closest = np.minimum(closest, _sq_distances(X, X[[nxt]]).ravel())
    return X[chosen].copy()


def _repair_empty(X: np.ndarray, centroids: np.ndarray, assignments: np.ndarray, k: int) -> np.ndarray:
    """
    Move the point farthest from its centroid into each empty cluster.

    With duplicate points the repaired centroid can coincide with its donor's;
    the donated point then sits at distance zero from two centroids and keeps
    the higher index, the one exception to lowest-index tie breaking.
    """
    assignments = assignments.copy()
    for cluster in range(k):
        counts = np.bincount(assignments, minlength=k)
        if counts[cluster] > 0:
            continue
        dist = ((X - centroids[assignments]) ** 2).sum(axis=1)
        # never empty a donor cluster
        dist[counts[assignments] <= 1] = -np.inf
        donor = int(np.argmax(dist))
        assignments[donor] = cluster
        centroids[cluster] = X[donor]
    return assignments


def _lloyd(
    X: np.ndarray,
    k: int,
    rng: np.random.Generator,
    max_iter: int,
    trace: Optional[List[float]] = None,
) -> Clustering:
    """One seeded Lloyd run; `trace`, when given, receives the SSE after every assignment step."""
    centroids = _seed_plusplus(X, k, rng)
    assignments = None
    for _ in range(max_iter):
        new_assignments = _repair_empty(X, centroids, _assign(X, centroids), k)
        if trace is not None:
            trace.append(_sse(X, centroids, new_assignments))
        if assignments is not None and np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
        for cluster in range(k):
            centroids[cluster] = X[assignments == cluster].mean(axis=0)
    else:
        assignments = _repair_empty(X, centroids, _assign(X, centroids), k)

    sizes = np.bincount(assignments, minlength=k)
    return Clustering(
        k=k,
        assignments=assignments,
        centroids=centroids,
        sizes=sizes,
        sse=_sse(X, centroids, assignments),
    )


def kmeans(
    X: np.ndarray,
    k: int,
    rng: np.random.Generator,
    restarts: int = DEFAULT_RESTARTS,
    max_iter: int = DEFAULT_MAX_ITER,
) -> Clustering:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points {n}")
    if restarts < 1 or max_iter < 1:
        raise ValueError("restarts and max_iter must be positive")
    if not np.isfinite(X).all():
        raise ValueError("kmeans input must be finite")

    best = None
    for restart in range(restarts):
        result = _lloyd(X, k, rng, max_iter)
        logging.debug("kmeans k=%d restart=%d sse=%.6g", k, restart, result.sse)
        if best is None or result.sse < best.sse:
            best = result
    return best


def closest_to_centroid(cluster_members: Sequence[int], X: np.ndarray, centroid: np.ndarray) -> int:
    members = np.sort(np.asarray(cluster_members, dtype=int))
    if members.size == 0:
        raise ValueError("closest_to_centroid needs a nonempty member list")
    dist = cdist(X[members], np.atleast_2d(centroid), "sqeuclidean").ravel()
    return int(members[np.argmin(dist)])
