import json
import logging
import os
from typing import Any, Dict, List, Optional, Tuple

from backend.evaluation.experiment import RunResult
from backend.utils import dump_json


class MissingResultsError(FileNotFoundError):
    """Exception raised when stats or viz find no stored bench output to work from."""


class RunStore():
    """
    Per-run result documents on the local filesystem, one JSON file per
    (dataset, strategy, run) under `<output_dir>/runs/`.
    """

    def __init__(self, output_dir: str):
        self.output_dir = output_dir
        self.runs_dir = os.path.join(output_dir, "runs")
        if os.path.exists(output_dir) and not os.path.isdir(output_dir):
            raise ValueError(f"Output path {output_dir} exists and is not a directory")

    def ensure(self):
        try:
            os.makedirs(self.runs_dir, exist_ok=True)
        except OSError as e:
            return False, f"Run store {self.runs_dir} could not be created: {e}"
        if not os.access(self.runs_dir, os.W_OK):
            return False, f"Run store {self.runs_dir} is not writable"
        return True, "Run store initialized successfully"

    def run_path(self, dataset: str, strategy: str, run: int) -> str:
        return os.path.join(self.runs_dir, dataset, strategy, f"run_{run}.json")

    def upsert_run(self, result: RunResult) -> str:
        path = self.run_path(result.dataset, result.strategy, result.run)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        # write-then-rename
        partial = path + ".tmp"
        dump_json(result.to_dict(), partial)
        os.replace(partial, path)
        return path

    def get_run(
        self, dataset: str, strategy: str, run: int, fingerprint: Optional[Dict[str, Any]] = None
    ) -> Optional[RunResult]:
        """
        The stored result, or None when there is none, it cannot be read, or
        it was produced with settings other than `fingerprint`.
        """
        path = self.run_path(dataset, strategy, run)
        if not os.path.isfile(path):
            return None
        try:
            with open(path, encoding="utf-8") as f:
                result = RunResult.from_dict(json.load(f))
        except (json.JSONDecodeError, TypeError, KeyError) as e:
            logging.warning("Ignoring unreadable run file %s: %s", path, e)
            return None
        if fingerprint is not None and result.fingerprint != fingerprint:
            changed = sorted(k for k in set(fingerprint) | set(result.fingerprint)
                             if fingerprint.get(k) != result.fingerprint.get(k))
            logging.warning("Ignoring stale run file %s: settings differ in %s", path, changed)
            return None
        return result

    def get_runs(
        self,
        dataset: str,
        strategies: List[str],
        runs: int,
        fingerprints: Optional[Dict[Tuple[str, int], Dict[str, Any]]] = None,
    ) -> List[RunResult]:
        """All stored results for `dataset`, strategy-major; any gap or stale run is an error."""
        found, missing = [], []
        for strategy in strategies:
            for run in range(runs):
                expected = fingerprints.get((strategy, run)) if fingerprints is not None else None
                result = self.get_run(dataset, strategy, run, expected)
                if result is None:
                    missing.append(f"{strategy}/run_{run}")
                else:
                    found.append(result)
        if missing:
            shown = ", ".join(missing[:5]) + (" ..." if len(missing) > 5 else "")
            raise MissingResultsError(
                f"{len(missing)} stored runs missing or stale for dataset '{dataset}' in {self.runs_dir}: "
                f"{shown}; run bench first"
            )
        return found
