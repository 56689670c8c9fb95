"""
Per-iteration selectors. Every selector returns a dataset index and breaks
ties toward the lowest index, because candidates are kept sorted and
numpy's argmax/argmin return the first extremum.
"""
import logging
from typing import Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from backend.clustering import Clustering, closest_to_centroid, kmeans
from backend.regression import bootstrap_committee, committee_predictions, fit_ridge, predict
from backend.strategies.pool import PoolState, StrategyError


def _as_candidates(candidates) -> np.ndarray:
    candidates = np.unique(np.asarray(candidates, dtype=int))
    if candidates.size == 0:
        raise StrategyError("Candidate set is empty")
    return candidates


def _require_labels(state: PoolState) -> None:
    if not state.labeled:
        raise StrategyError("At least one labeled sample is required")


def qbc_scores(state: PoolState, candidates: np.ndarray, P: int) -> np.ndarray:
    """Population variance of committee predictions for each candidate."""
    committee = bootstrap_committee(state.labeled_X(), state.labeled_y(), P, state.rng, state.sigma)
    return np.var(committee_predictions(committee, state.X[candidates]), axis=0)


def emcm_scores(state: PoolState, candidates: np.ndarray, P: int) -> np.ndarray:
    """Mean |committee - master| prediction gap scaled by the feature norm."""
    X_lab, y_lab = state.labeled_X(), state.labeled_y()
    master = fit_ridge(X_lab, y_lab, state.sigma)
    committee = bootstrap_committee(X_lab, y_lab, P, state.rng, state.sigma)
    X_cand = state.X[candidates]
    gaps = np.abs(committee_predictions(committee, X_cand) - predict(master, X_cand))
    return gaps.mean(axis=0) * np.linalg.norm(X_cand, axis=1)


def gs_scores(state: PoolState, candidates: np.ndarray) -> np.ndarray:
    """Distance from each candidate to its nearest labeled sample."""
    return cdist(state.X[candidates], state.labeled_X()).min(axis=1)


def select_qbc(state: PoolState, candidates, P: int) -> int:
    candidates = _as_candidates(candidates)
    _require_labels(state)
    return int(candidates[np.argmax(qbc_scores(state, candidates, P))])


def select_emcm(state: PoolState, candidates, P: int) -> int:
    candidates = _as_candidates(candidates)
    _require_labels(state)
    return int(candidates[np.argmax(emcm_scores(state, candidates, P))])


def select_gs(state: PoolState, candidates) -> int:
    candidates = _as_candidates(candidates)
    _require_labels(state)
    return int(candidates[np.argmax(gs_scores(state, candidates))])


def largest_labeled_free_cluster(
    clustering: Clustering, indices: np.ndarray, labeled
) -> Tuple[Optional[int], np.ndarray]:
    """
    Largest cluster holding no labeled sample, lowest cluster index on ties.

    `indices` maps clustered rows back to dataset indices. Returns
    (None, empty) when every cluster holds a labeled sample.
    """
    occupied = np.isin(indices, labeled)
    taken = np.zeros(clustering.k, dtype=bool)
    taken[clustering.assignments[occupied]] = True
    sizes = np.where(taken, -1, clustering.sizes)
    sizes[clustering.sizes == 0] = -1
    cluster = int(np.argmax(sizes))
    if sizes[cluster] < 0:
        return None, np.empty(0, dtype=int)
    return cluster, indices[clustering.members(cluster)]


def _fallback_closest(state: PoolState, clustering: Clustering, indices: np.ndarray) -> int:
    unlabeled = ~np.isin(indices, state.labeled)
    for cluster in sorted(range(clustering.k), key=lambda c: (-clustering.sizes[c], c)):
        members = clustering.members(cluster)
        members = members[unlabeled[members]]
        if members.size:
            return closest_to_centroid(indices[members], state.X, clustering.centroids[cluster])
    raise StrategyError("No unlabeled samples remain")


def select_rd(state: PoolState, m: int, option: int, P: int) -> int:
    """
    Cluster the active pool into m groups and select from the largest
    cluster that holds no labeled sample.

    option 1 picks the member closest to the centroid, 2/3/4 apply QBC, EMCM
    or GS to the cluster's members. Without a labeled-free cluster, the
    option's selector runs over every unlabeled sample.
    """
    if option not in (1, 2, 3, 4):
        raise StrategyError(f"Unknown RD option {option}")
    if m < 2 or len(state.labeled) != m - 1:
        raise StrategyError(f"select_rd expects m-1={m - 1} labeled samples, found {len(state.labeled)}")
    unlabeled = state.unlabeled()
    if unlabeled.size == 0:
        raise StrategyError("No unlabeled samples remain")

    active = state.active()
    clustering = kmeans(state.X[active], m, state.rng, state.kmeans_restarts, state.kmeans_max_iter)
    cluster, members = largest_labeled_free_cluster(clustering, active, state.labeled)

    if cluster is None:
        logging.debug("RD m=%d: every cluster holds a labeled sample, widening to all unlabeled", m)
        if option == 1:
            return _fallback_closest(state, clustering, active)
        members = unlabeled
    else:
        logging.debug("RD m=%d: cluster %d with %d members", m, cluster, members.size)

    if option == 1:
        return closest_to_centroid(members, state.X, clustering.centroids[cluster])
    if option == 2:
        return select_qbc(state, members, P)
    if option == 3:
        return select_emcm(state, members, P)
    return select_gs(state, members)
