import json
import os
import pytest

from backend.data import make_two_blobs
from backend.strategies import MAIN_STRATEGIES


@pytest.fixture(scope="function")
def blobs_csv(tmp_path) -> str:
    path = os.path.join(tmp_path, "blobs.csv")
    make_two_blobs(n=60, d=3, seed=11, name="blobs").to_frame().to_csv(path, index=False)
    return path


@pytest.fixture(scope="function")
def write_config(tmp_path, blobs_csv):
    def _write(**overrides) -> str:
        config = {
            "runs": 3,
            "base_seed": 5,
            "budget_bounds": [8, 12],
            "kmeans_restarts": 2,
            "stats_granularity": "run",
            "datasets": [{"name": "blobs", "path": os.path.basename(blobs_csv), "target": "y"}],
            "strategies": MAIN_STRATEGIES,
        }
        config.update(overrides)
        path = os.path.join(tmp_path, "config.json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump(config, f)
        return path

    return _write


@pytest.fixture(scope="function")
def config_path(write_config) -> str:
    return write_config()
