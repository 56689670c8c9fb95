import argparse
import logging
import os
from typing import List, Optional

import pandas as pd

from backend.data import DatasetError, load_dataset
from backend.evaluation import (
    METRICS,
    ResultsTable,
    project_pca2,
    run_experiment,
    run_fingerprint,
    selection_frame,
    summarize,
)
from backend.history import MissingResultsError, RunStore
from backend.regression import SingularSystemError
from backend.settings import ConfigError, ExperimentConfig, app_settings, parse_config
from backend.stats import compare_strategies
from backend.strategies import StrategyError
from backend.utils import dump_json, parse_multi_columns

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_DATASET = 3
EXIT_MISSING_RESULTS = 4
EXIT_STRATEGY = 5


def _load_config(args) -> ExperimentConfig:
    config, _ = parse_config(args.config, {"base_seed": args.seed, "runs": args.runs})
    datasets = parse_multi_columns(args.datasets) if getattr(args, "datasets", None) else None
    strategies = parse_multi_columns(args.strategies) if getattr(args, "strategies", None) else None
    return config.select(datasets, strategies)


def _open_store(output_dir: str) -> RunStore:
    store = RunStore(output_dir)
    ok, message = store.ensure()
    if not ok:
        raise ConfigError(message)
    return store


def write_tables(table: ResultsTable, directory: str) -> None:
    """Curves, per-run curves, AUCs, rank tables and the JSON summary of one results table."""
    os.makedirs(directory, exist_ok=True)
    table.curves.to_csv(os.path.join(directory, "curves.csv"), index=False)
    table.runs.to_csv(os.path.join(directory, "runs.csv"), index=False)
    table.auc.to_csv(os.path.join(directory, "auc.csv"), index=False)
    table.run_auc.to_csv(os.path.join(directory, "run_auc.csv"), index=False)
    for metric, ranking in table.rankings.items():
        ranking.with_average().to_csv(os.path.join(directory, f"ranks_{metric}.csv"), index_label="dataset")
    dump_json(table.summary(), os.path.join(directory, "summary.json"))


def _run_datasets(config: ExperimentConfig, store: RunStore, jobs: int, progress: bool) -> List[ResultsTable]:
    tables = []
    for spec in config.datasets:
        dataset = load_dataset(spec.path, spec.schema(), spec.name)
        tables.append(run_experiment(config, dataset, store=store, jobs=jobs, progress=progress))
    return tables


def cmd_run(args) -> int:
    config = _load_config(args)
    config = config.select([config.dataset(args.dataset).name])
    store = _open_store(args.output)
    table = _run_datasets(config, store, args.jobs, progress=False)[0]
    directory = os.path.join(args.output, config.datasets[0].name)
    write_tables(table, directory)
    logging.info("Wrote results for '%s' to %s", config.datasets[0].name, directory)
    return EXIT_OK


def cmd_bench(args) -> int:
    config = _load_config(args)
    store = _open_store(args.output)
    tables = _run_datasets(config, store, args.jobs, progress=not args.no_progress)
    write_tables(ResultsTable.merge(tables), args.output)
    logging.info("Bench over %d datasets written to %s", len(tables), args.output)
    return EXIT_OK


def load_stored_table(config: ExperimentConfig, store: RunStore) -> ResultsTable:
    names = [s.name for s in config.strategies]
    fingerprints = {
        (s.name, run): run_fingerprint(config, s, run) for s in config.strategies for run in range(config.runs)
    }
    frames = []
    for spec in config.datasets:
        results = store.get_runs(spec.name, names, config.runs, fingerprints)
        frames.extend(result.to_frame() for result in results)
    return summarize(pd.concat(frames, ignore_index=True), names)


def cmd_stats(args) -> int:
    config = _load_config(args)
    store = RunStore(args.output)
    if not os.path.isdir(store.runs_dir):
        raise MissingResultsError(f"No bench output found in {args.output}; run bench first")
    table = load_stored_table(config, store)
    granularity = args.granularity or config.stats_granularity
    alpha = args.alpha if args.alpha is not None else config.alpha

    reports = {}
    for metric in METRICS:
        report = compare_strategies(table, metric, granularity, alpha)
        report.triangular().to_csv(os.path.join(args.output, f"stats_{metric}.csv"), index_label="strategy")
        reports[metric] = report.to_dict()
    dump_json(reports, os.path.join(args.output, "stats.json"))
    logging.info("Wrote Dunn/FDR comparisons to %s", args.output)
    return EXIT_OK


def cmd_viz(args) -> int:
    config = _load_config(args)
    spec = config.dataset(args.dataset)
    strategy = config.select(None, [args.strategy]).strategies[0]
    store = RunStore(args.output)
    result = store.get_run(spec.name, strategy.name, args.run, run_fingerprint(config, strategy, args.run))
    if result is None:
        raise MissingResultsError(
            f"No stored run matching the config for {spec.name}/{args.strategy}/run_{args.run} in {args.output}; run bench first"
        )
    step = args.step if args.step is not None else len(result.query_order)
    if not 1 <= step <= len(result.query_order):
        raise ConfigError(f"--step must lie in [1, {len(result.query_order)}], got {step}")

    dataset = load_dataset(spec.path, spec.schema(), spec.name)
    frame = selection_frame(project_pca2(dataset.X), result.pool, result.query_order, step)
    path = args.export or os.path.join(
        args.output, "viz", f"{spec.name}_{args.strategy}_run{args.run}_step{step}.csv"
    )
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    frame.to_csv(path, index=False)
    logging.info("Wrote PCA selection snapshot (%d samples, %d selected) to %s", len(frame), step, path)
    return EXIT_OK


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alr",
        description="Pool-based sequential active learning for regression: experiments and benchmark tables.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_common(sub, filters=True):
        sub.add_argument("--config", type=str, required=True, help="Experiment JSON config file.")
        sub.add_argument(
            "--output", type=str, default=app_settings.runtime.output_dir,
            help="Output directory (default: $ALR_OUTPUT_DIR or 'results').",
        )
        sub.add_argument("--seed", type=int, default=None, help="Override base_seed.")
        sub.add_argument("--runs", type=int, default=None, help="Override the number of runs.")
        if filters:
            sub.add_argument("--strategies", type=str, default=None, help="Strategy names, comma or pipe separated.")

    run = subparsers.add_parser("run", help="Run every strategy on a single dataset.")
    add_common(run)
    run.add_argument("--dataset", type=str, default=None, help="Dataset name (default: first in config).")
    run.add_argument("--jobs", type=int, default=app_settings.runtime.jobs)
    run.set_defaults(func=cmd_run)

    bench = subparsers.add_parser("bench", help="Resumable sweep over every dataset and strategy.")
    add_common(bench)
    bench.add_argument("--datasets", type=str, default=None, help="Dataset names, comma or pipe separated.")
    bench.add_argument("--jobs", type=int, default=app_settings.runtime.jobs)
    bench.add_argument("--no-progress", action="store_true", help="Disable the progress bar.")
    bench.set_defaults(func=cmd_bench)

    viz = subparsers.add_parser("viz", help="Export a PCA snapshot of one stored run's selections.")
    add_common(viz, filters=False)
    viz.add_argument("--dataset", type=str, default=None)
    viz.add_argument("--strategy", type=str, required=True)
    viz.add_argument("--run", type=int, default=0)
    viz.add_argument("--step", type=int, default=None, help="Number of queried samples to show (default: all).")
    viz.add_argument("--export", type=str, default=None, help="CSV path (default: <output>/viz/...).")
    viz.set_defaults(func=cmd_viz)

    stats = subparsers.add_parser("stats", help="Dunn/FDR comparisons over a completed bench output.")
    add_common(stats)
    stats.add_argument("--datasets", type=str, default=None)
    stats.add_argument("--granularity", choices=["dataset", "run"], default=None)
    stats.add_argument("--alpha", type=float, default=None)
    stats.set_defaults(func=cmd_stats)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = create_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        logging.error("--jobs must be at least 1")
        return EXIT_CONFIG
    try:
        return args.func(args)
    except MissingResultsError:
        logging.exception("Missing prerequisite results")
        return EXIT_MISSING_RESULTS
    except ConfigError:
        logging.exception("Invalid configuration")
        return EXIT_CONFIG
    except DatasetError:
        logging.exception("Invalid dataset")
        return EXIT_DATASET
    except (StrategyError, SingularSystemError):
        logging.exception("Strategy failed")
        return EXIT_STRATEGY
    except Exception:
        logging.exception("Unexpected error")
        return EXIT_UNEXPECTED
