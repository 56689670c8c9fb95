"""Dunn's rank-based multiple comparison with Benjamini-Hochberg correction."""
import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Literal, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import false_discovery_control, norm, rankdata

from backend.evaluation.tables import ResultsTable

Granularity = Literal["dataset", "run"]


def dunn_pairwise(groups: Sequence[Sequence[float]]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Pairwise z statistics and two-sided p-values over pooled average ranks.

    Returns (z, p), both k x k; z[i, j] = -z[j, i] and p is symmetric with
    ones on the diagonal.
    """
    if len(groups) < 2:
        raise ValueError(f"Dunn's test needs at least 2 groups, got {len(groups)}")
    arrays = [np.asarray(g, dtype=float).ravel() for g in groups]
    for i, a in enumerate(arrays):
        if a.size < 2:
            raise ValueError(f"Group {i} has {a.size} observations; at least 2 are required")
        if not np.all(np.isfinite(a)):
            raise ValueError(f"Group {i} contains non-finite observations")

    pooled = np.concatenate(arrays)
    total = pooled.size
    ranks = rankdata(pooled, method="average")
    _, ties = np.unique(pooled, return_counts=True)
    tie_correction = float(np.sum(ties ** 3 - ties)) / (12.0 * (total - 1))
    variance = total * (total + 1) / 12.0 - tie_correction

    k = len(arrays)
    z = np.zeros((k, k))
    p = np.ones((k, k))
    if variance <= 0:
        logging.warning("All observations are identical; every pairwise p-value is 1")
        return z, p

    sizes = np.array([a.size for a in arrays])
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    mean_ranks = np.array([ranks[bounds[i]:bounds[i + 1]].mean() for i in range(k)])
    for i, j in combinations(range(k), 2):
        z[i, j] = (mean_ranks[i] - mean_ranks[j]) / np.sqrt(variance * (1.0 / sizes[i] + 1.0 / sizes[j]))
        z[j, i] = -z[i, j]
        p[i, j] = p[j, i] = min(1.0, 2.0 * norm.sf(abs(z[i, j])))
    return z, p


def fdr_bh(p_values: Sequence[float], alpha: float = 0.05) -> Tuple[np.ndarray, np.ndarray]:
    """Benjamini-Hochberg step-up adjusted p-values and the `adjusted < alpha` flags."""
    p = np.asarray(p_values, dtype=float)
    if p.size == 0:
        return p, np.zeros(0, dtype=bool)
    if np.any((p < 0) | (p > 1)) or not np.all(np.isfinite(p)):
        raise ValueError("p-values must lie in [0, 1]")
    adjusted = np.minimum(false_discovery_control(p, method="bh"), 1.0)
    return adjusted, adjusted < alpha


@dataclass
class ComparisonReport:
    metric: str
    granularity: str
    alpha: float
    strategies: List[str]
    pairs: List[Tuple[str, str]]
    z: List[float]
    raw_p: List[float]
    adjusted_p: List[float]
    significant: List[bool]

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "granularity": self.granularity,
            "alpha": self.alpha,
            "strategies": self.strategies,
            "comparisons": [
                {"a": a, "b": b, "z": z, "p": p, "p_adjusted": q, "significant": s}
                for (a, b), z, p, q, s in zip(self.pairs, self.z, self.raw_p, self.adjusted_p, self.significant)
            ],
        }

    def triangular(self) -> pd.DataFrame:
        """Adjusted p-values, lower triangle only, rounded to 4 decimals."""
        lookup = {pair: q for pair, q in zip(self.pairs, self.adjusted_p)}
        rows = self.strategies[1:]
        columns = self.strategies[:-1]
        table = pd.DataFrame(index=rows, columns=columns, dtype=object)
        for i, row in enumerate(rows, start=1):
            for j, column in enumerate(columns):
                table.loc[row, column] = f"{lookup[(column, row)]:.4f}" if j < i else ""
        return table


def observations(table: ResultsTable, metric: str, granularity: Granularity = "dataset") -> Dict[str, np.ndarray]:
    """
    Normalized AUCs per strategy: one per dataset, or one per (dataset, run).

    Undefined AUCs (a CC curve with an undefined point) are dropped and counted.
    """
    if granularity == "dataset":
        matrix = table.auc_matrix(metric, normalized=True)
        groups = {s: matrix[s].to_numpy(dtype=float) for s in table.strategies}
    elif granularity == "run":
        frame = table.run_auc[table.run_auc["metric"] == metric]
        frame = frame.sort_values(["dataset", "run"], kind="mergesort")
        groups = {s: frame.loc[frame["strategy"] == s, "normalized_auc"].to_numpy(dtype=float) for s in table.strategies}
    else:
        raise ValueError(f"Unknown granularity '{granularity}'")

    dropped = {s: int((~np.isfinite(v)).sum()) for s, v in groups.items()}
    if any(dropped.values()):
        logging.warning(
            "%s: dropped %d undefined observations before ranking: %s",
            metric, sum(dropped.values()), {s: n for s, n in dropped.items() if n},
        )
    return {s: v[np.isfinite(v)] for s, v in groups.items()}


def compare_strategies(
    table: ResultsTable,
    metric: str,
    granularity: Granularity = "dataset",
    alpha: float = 0.05,
) -> ComparisonReport:
    groups = observations(table, metric, granularity)
    strategies = list(groups)
    z, p = dunn_pairwise([groups[s] for s in strategies])
    index_pairs = list(combinations(range(len(strategies)), 2))
    raw = [float(p[i, j]) for i, j in index_pairs]
    adjusted, flags = fdr_bh(raw, alpha)
    logging.info(
        "%s: %d of %d strategy pairs significant at alpha=%s (%s granularity)",
        metric, int(flags.sum()), len(index_pairs), alpha, granularity,
    )
    return ComparisonReport(
        metric=metric,
        granularity=granularity,
        alpha=alpha,
        strategies=strategies,
        pairs=[(strategies[i], strategies[j]) for i, j in index_pairs],
        z=[float(z[i, j]) for i, j in index_pairs],
        raw_p=raw,
        adjusted_p=[float(q) for q in adjusted],
        significant=[bool(f) for f in flags],
    )
