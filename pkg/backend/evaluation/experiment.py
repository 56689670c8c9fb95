import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from backend.data import Dataset
from backend.evaluation.metrics import compute_budget, inductive_metrics, split_pool, transductive_metrics
from backend.evaluation.tables import METRICS, ResultsTable, summarize
from backend.regression import fit_ridge
from backend.settings import ExperimentConfig
from backend.strategies import PoolState, StrategyError, StrategySpec, run_strategy


@dataclass
class RunResult:
    dataset: str
    strategy: str
    kind: str
    run: int
    seed: int
    pool: List[int]
    test: List[int]
    query_order: List[int]
    steps: List[int]
    rmse_t: List[float]
    cc_t: List[float]
    rmse_i: List[float]
    cc_i: List[float]
    # settings the run was produced with; see run_fingerprint
    fingerprint: Dict[str, Any] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"m": self.steps, **{metric: getattr(self, metric) for metric in METRICS}})
        frame.insert(0, "run", self.run)
        frame.insert(0, "strategy", self.strategy)
        frame.insert(0, "dataset", self.dataset)
        return frame

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunResult":
        data = dict(data)
        for metric in METRICS:
            data[metric] = [np.nan if v is None else float(v) for v in data[metric]]
        return cls(**data)


def run_seed(config: ExperimentConfig, run: int) -> int:
    return config.base_seed + run


def run_fingerprint(config: ExperimentConfig, spec: StrategySpec, run: int) -> Dict[str, Any]:
    """Every setting that changes the outcome of one (strategy, run); stored runs must match it to be reused."""
    return {
        "seed": run_seed(config, run),
        "kind": spec.kind,
        "committee_size": spec.committee_size,
        "ebmalr_gamma": spec.ebmalr_gamma,
        "sigma": config.sigma,
        "train_fraction": config.train_fraction,
        "budget_fraction": config.budget_fraction,
        "budget_bounds": list(config.budget_bounds),
        "kmeans_restarts": config.kmeans_restarts,
        "kmeans_max_iter": config.kmeans_max_iter,
    }


def run_split(dataset: Dataset, config: ExperimentConfig, run: int) -> Tuple[np.ndarray, np.ndarray]:
    """The training pool and test split shared by every strategy in `run`."""
    rng = np.random.default_rng([run_seed(config, run), 0])
    return split_pool(dataset, config.train_fraction, rng)


def new_pool_state(dataset: Dataset, config: ExperimentConfig, run: int, pool: np.ndarray) -> PoolState:
    # every strategy of a run draws from the same stream, so identical specs give identical runs
    return PoolState(
        dataset=dataset,
        rng=np.random.default_rng([run_seed(config, run), 1]),
        pool=pool,
        sigma=config.sigma,
        kmeans_restarts=config.kmeans_restarts,
        kmeans_max_iter=config.kmeans_max_iter,
    )


def budget_for(dataset: Dataset, config: ExperimentConfig, pool_size: int) -> int:
    try:
        M = compute_budget(pool_size, config.budget_fraction, config.budget_bounds)
    except ValueError as e:
        raise StrategyError(f"Dataset '{dataset.name}': {e}") from e
    if M < dataset.d:
        raise StrategyError(f"Budget M={M} is below d={dataset.d} for dataset '{dataset.name}'")
    return M


def evaluate_query_order(
    dataset: Dataset,
    pool: np.ndarray,
    test: np.ndarray,
    query_order: Sequence[int],
    sigma: float,
) -> Dict[str, List[float]]:
    """Fit ridge after each query from m = d to M and record both metric pairs."""
    curves = {"steps": [], **{metric: [] for metric in METRICS}}
    for m in range(dataset.d, len(query_order) + 1):
        labeled = list(query_order[:m])
        model = fit_ridge(dataset.X[labeled], dataset.y[labeled], sigma)
        trans = transductive_metrics(dataset, pool, labeled, model)
        ind = inductive_metrics(dataset, test, model)
        curves["steps"].append(m)
        curves["rmse_t"].append(trans.rmse)
        curves["cc_t"].append(trans.cc)
        curves["rmse_i"].append(ind.rmse)
        curves["cc_i"].append(ind.cc)
    return curves


def execute_run(dataset: Dataset, config: ExperimentConfig, run: int, strategies: Optional[Sequence[StrategySpec]] = None) -> List[RunResult]:
    """One evaluation run: a shared split, then every strategy on it."""
    pool, test = run_split(dataset, config, run)
    M = budget_for(dataset, config, pool.size)
    results = []
    for spec in strategies if strategies is not None else config.strategies:
        state = new_pool_state(dataset, config, run, pool)
        order = run_strategy(spec, state, M)
        curves = evaluate_query_order(dataset, pool, test, order, config.sigma)
        results.append(
            RunResult(
                dataset=dataset.name,
                strategy=spec.name,
                kind=spec.kind,
                run=run,
                seed=run_seed(config, run),
                pool=pool.tolist(),
                test=test.tolist(),
                query_order=[int(i) for i in order],
                **curves,
                fingerprint=run_fingerprint(config, spec, run),
            )
        )
    return results


def _run_task(task: Tuple[int, List[StrategySpec]], dataset: Dataset, config: ExperimentConfig) -> List[RunResult]:
    run, strategies = task
    return execute_run(dataset, config, run, strategies)


def run_experiment(
    config: ExperimentConfig,
    dataset: Dataset,
    store=None,
    jobs: int = 1,
    progress: bool = False,
) -> ResultsTable:
    """
    Run every configured strategy `config.runs` times on `dataset`.

    With a `store`, finished (strategy, run) results are read back instead of
    recomputed and new ones are written as they complete. Output does not
    depend on `jobs`.
    """
    results: Dict[Tuple[str, int], RunResult] = {}
    tasks = []
    for run in range(config.runs):
        pending = []
        for spec in config.strategies:
            cached = None
            if store is not None:
                cached = store.get_run(dataset.name, spec.name, run, run_fingerprint(config, spec, run))
            if cached is not None:
                results[(spec.name, run)] = cached
            else:
                pending.append(spec)
        if pending:
            tasks.append((run, pending))
    if results:
        logging.info("Resuming '%s': %d of %d strategy runs already stored", dataset.name, len(results), config.runs * len(config.strategies))

    worker = partial(_run_task, dataset=dataset, config=config)
    bar = tqdm(total=len(tasks), desc=f"{dataset.name}", disable=not progress)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            for finished in executor.map(worker, tasks):
                _collect(finished, results, store)
                bar.update(1)
    else:
        for task in tasks:
            _collect(worker(task), results, store)
            bar.update(1)
    bar.close()

    ordered = [results[(spec.name, run)] for spec in config.strategies for run in range(config.runs)]
    runs = pd.concat([r.to_frame() for r in ordered], ignore_index=True)
    return summarize(runs, [spec.name for spec in config.strategies])


def _collect(finished: List[RunResult], results: Dict[Tuple[str, int], RunResult], store) -> None:
    for result in finished:
        results[(result.strategy, result.run)] = result
        if store is not None:
            store.upsert_run(result)
        logging.info("Finished %s/%s run %d", result.dataset, result.strategy, result.run)
