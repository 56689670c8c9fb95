"""Learning-curve aggregation: mean curves, AUCs, BL-normalized AUCs and rank tables."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from scipy.stats import rankdata

METRICS = ("rmse_t", "cc_t", "rmse_i", "cc_i")
LOWER_IS_BETTER = {"rmse_t": True, "cc_t": False, "rmse_i": True, "cc_i": False}
RUN_COLUMNS = ["dataset", "strategy", "run", "m", *METRICS]
BASELINE = "BL"
AVERAGE_ROW = "Average"
RANK_OF_AVERAGE_ROW = "Rank of average"


def compute_auc(mean_curve: Sequence[float]) -> float:
    """Composite trapezoid over consecutive integer budgets."""
    curve = np.asarray(mean_curve, dtype=float)
    if curve.size < 2:
        raise ValueError("AUC needs a curve of at least two points")
    return float(trapezoid(curve, dx=1.0))


@dataclass
class RankTable:
    metric: str
    normalized: pd.DataFrame
    # datasets x strategies, 1 = best, average ranks on ties
    ranks: pd.DataFrame
    mean_rank: pd.Series
    rank_of_mean: pd.Series

    def with_average(self) -> pd.DataFrame:
        table = self.ranks.copy()
        table.loc[AVERAGE_ROW] = self.mean_rank
        table.loc[RANK_OF_AVERAGE_ROW] = self.rank_of_mean
        return table


def normalize_and_rank(aucs: pd.DataFrame, metric: str, baseline: str = BASELINE) -> RankTable:
    """
    `aucs` is datasets x strategies. Each row is divided by its baseline AUC
    and ranked; smaller is better for RMSE, larger for CC.
    """
    if baseline not in aucs.columns:
        raise ValueError(f"Baseline strategy '{baseline}' missing from AUC table")
    base = aucs[baseline]
    if (base == 0).any():
        raise ValueError(f"Baseline AUC is zero for {list(base.index[base == 0])}")
    normalized = aucs.div(base, axis=0)

    sign = 1.0 if LOWER_IS_BETTER[metric] else -1.0
    ranks = normalized.apply(
        lambda row: pd.Series(rankdata(sign * row.to_numpy(), method="average"), index=row.index),
        axis=1,
    )
    mean_rank = ranks.mean(axis=0)
    rank_of_mean = pd.Series(rankdata(mean_rank.to_numpy(), method="average"), index=mean_rank.index)
    return RankTable(metric=metric, normalized=normalized, ranks=ranks, mean_rank=mean_rank, rank_of_mean=rank_of_mean)


def _ordered(frame: pd.DataFrame, strategies: Sequence[str]) -> pd.DataFrame:
    frame = frame.copy()
    # datasets keep their first-appearance order, strategies the configured one
    frame["dataset"] = pd.Categorical(frame["dataset"], categories=list(dict.fromkeys(frame["dataset"])), ordered=True)
    frame["strategy"] = pd.Categorical(frame["strategy"], categories=list(strategies), ordered=True)
    keys = [c for c in ("dataset", "strategy", "run", "m") if c in frame.columns]
    frame = frame.sort_values(keys, kind="mergesort").reset_index(drop=True)
    frame["dataset"] = frame["dataset"].astype(str)
    frame["strategy"] = frame["strategy"].astype(str)
    return frame


@dataclass
class ResultsTable:
    strategies: List[str]
    runs: pd.DataFrame
    curves: pd.DataFrame
    auc: pd.DataFrame
    run_auc: pd.DataFrame
    rankings: Dict[str, RankTable] = field(default_factory=dict)

    @property
    def datasets(self) -> List[str]:
        return list(dict.fromkeys(self.runs["dataset"]))

    def auc_matrix(self, metric: str, normalized: bool = False) -> pd.DataFrame:
        column = "normalized_auc" if normalized else "auc"
        matrix = self.auc[self.auc["metric"] == metric].pivot(index="dataset", columns="strategy", values=column)
        return matrix.loc[self.datasets, self.strategies]

    def summary(self) -> dict:
        summary = {"strategies": self.strategies, "datasets": self.datasets, "auc": {}, "normalized_auc": {}, "ranks": {}}
        for row in self.auc.itertuples(index=False):
            summary["auc"].setdefault(row.dataset, {}).setdefault(row.strategy, {})[row.metric] = row.auc
            summary["normalized_auc"].setdefault(row.dataset, {}).setdefault(row.strategy, {})[row.metric] = row.normalized_auc
        for metric, table in self.rankings.items():
            summary["ranks"][metric] = {
                "per_dataset": table.ranks.to_dict(orient="index"),
                "mean_rank": table.mean_rank.to_dict(),
                "rank_of_mean": table.rank_of_mean.to_dict(),
            }
        undefined = self.curves.groupby("strategy", sort=False)[["cc_t_undefined", "cc_i_undefined"]].sum()
        summary["cc_undefined"] = undefined.astype(int).to_dict(orient="index")
        return summary

    @classmethod
    def merge(cls, tables: Sequence["ResultsTable"]) -> "ResultsTable":
        strategies = list(dict.fromkeys(s for t in tables for s in t.strategies))
        return summarize(pd.concat([t.runs for t in tables], ignore_index=True), strategies)


def summarize(runs: pd.DataFrame, strategies: Sequence[str], baseline: str = BASELINE) -> ResultsTable:
    """Aggregate per-run curves into mean curves, AUCs and rank tables."""
    runs = _ordered(runs[RUN_COLUMNS], strategies)
    grouped = runs.groupby(["dataset", "strategy", "m"], sort=False)
    curves = grouped[list(METRICS)].mean().reset_index()
    undefined = grouped[["cc_t", "cc_i"]].agg(lambda s: int(s.isna().sum()))
    curves["cc_t_undefined"] = undefined["cc_t"].to_numpy()
    curves["cc_i_undefined"] = undefined["cc_i"].to_numpy()
    skipped = int(curves[["cc_t_undefined", "cc_i_undefined"]].to_numpy().sum())
    if skipped:
        logging.warning("Excluded %d undefined CC values (constant vectors) from the mean curves", skipped)

    records = []
    for (dataset, strategy), curve in curves.groupby(["dataset", "strategy"], sort=False):
        for metric in METRICS:
            records.append({"dataset": dataset, "strategy": strategy, "metric": metric, "auc": compute_auc(curve[metric])})
    auc = pd.DataFrame.from_records(records)

    run_records = []
    for (dataset, strategy, run), curve in runs.groupby(["dataset", "strategy", "run"], sort=False):
        for metric in METRICS:
            run_records.append(
                {"dataset": dataset, "strategy": strategy, "run": run, "metric": metric, "auc": compute_auc(curve[metric])}
            )
    run_auc = pd.DataFrame.from_records(run_records)

    rankings = {}
    if baseline in set(runs["strategy"]):
        base = auc[auc["strategy"] == baseline].set_index(["dataset", "metric"])["auc"]
        auc["normalized_auc"] = auc["auc"].to_numpy() / base.loc[list(zip(auc["dataset"], auc["metric"]))].to_numpy()
        run_base = run_auc[run_auc["strategy"] == baseline].set_index(["dataset", "run", "metric"])["auc"]
        keys = list(zip(run_auc["dataset"], run_auc["run"], run_auc["metric"]))
        run_auc["normalized_auc"] = run_auc["auc"].to_numpy() / run_base.loc[keys].to_numpy()
        for metric in METRICS:
            matrix = auc[auc["metric"] == metric].pivot(index="dataset", columns="strategy", values="auc")
            matrix = matrix.loc[list(dict.fromkeys(runs["dataset"])), list(strategies)]
            rankings[metric] = normalize_and_rank(matrix, metric, baseline)
    else:
        logging.warning("Baseline '%s' not among the strategies; AUCs are left unnormalized", baseline)
        auc["normalized_auc"] = np.nan
        run_auc["normalized_auc"] = np.nan

    return ResultsTable(
        strategies=list(strategies),
        runs=runs,
        curves=curves,
        auc=auc,
        run_auc=run_auc,
        rankings=rankings,
    )
