import logging
import math

import numpy as np
import pandas as pd
import pytest

from backend.data import Dataset, make_two_blobs
from backend.evaluation import (
    AVERAGE_ROW,
    RANK_OF_AVERAGE_ROW,
    ResultsTable,
    RunResult,
    compute_auc,
    compute_budget,
    correlation,
    execute_run,
    inductive_metrics,
    normalize_and_rank,
    project_pca2,
    run_experiment,
    run_split,
    selection_frame,
    split_pool,
    summarize,
    transductive_metrics,
)
from backend.regression import RidgeModel
from backend.settings import ExperimentConfig

TABLE_ORDER = ["BL", "QBC", "EMCM", "EEMCM", "GS", "RD", "RD-QBC", "RD-EMCM", "RD-GS"]


def _dataset(X, y):
    X = np.asarray(X, dtype=float)
    return Dataset(X=X, y=np.asarray(y, dtype=float), feature_names=tuple(f"x{i}" for i in range(X.shape[1])))


def _config(strategies, **overrides):
    payload = {
        "datasets": [{"name": "two-blobs", "path": "two_blobs.csv", "target": "y"}],
        "strategies": strategies,
        "runs": 2,
        "kmeans_restarts": 2,
        "base_seed": 0,
    }
    payload.update(overrides)
    return ExperimentConfig.model_validate(payload)


def test_split_pool_floor_rule_and_determinism():
    dataset = _dataset(np.zeros((103, 1)), np.zeros(103))
    train, test = split_pool(dataset, 0.8, np.random.default_rng(0))
    assert (train.size, test.size) == (82, 21)
    assert sorted(np.concatenate([train, test]).tolist()) == list(range(103))
    again, _ = split_pool(dataset, 0.8, np.random.default_rng(0))
    np.testing.assert_array_equal(train, again)


@pytest.mark.parametrize("n, fraction", [(4, 0.8), (10, 1.0), (10, 0.0)])
def test_split_pool_rejects_degenerate(n, fraction):
    with pytest.raises(ValueError):
        split_pool(_dataset(np.zeros((n, 1)), np.zeros(n)), fraction, np.random.default_rng(0))


@pytest.mark.parametrize("pool_size, expected", [(82, 20), (3918, 60), (300, 30), (205, 21), (600, 60), (20, 20)])
def test_compute_budget(pool_size, expected):
    assert compute_budget(pool_size, 0.1, (20, 60)) == expected


def test_compute_budget_monotone_and_bounded():
    budgets = [compute_budget(n, 0.1, (20, 60)) for n in range(20, 1000)]
    assert all(a <= b for a, b in zip(budgets, budgets[1:]))
    assert min(budgets) == 20 and max(budgets) == 60
    with pytest.raises(ValueError, match="smaller than the minimum"):
        compute_budget(19, 0.1, (20, 60))


def test_transductive_hand_fixture():
    dataset = _dataset([[0.0], [1.0], [2.0]], [0.0, 1.0, 2.0])
    model = RidgeModel(w=np.zeros(1), b=1.5, sigma=0.01)
    metrics = transductive_metrics(dataset, np.arange(3), [0], model)
    assert metrics.rmse == pytest.approx(math.sqrt(0.5 / 3), abs=1e-5)
    assert metrics.rmse == pytest.approx(0.40825, abs=1e-5)
    assert metrics.cc == pytest.approx(0.86603, abs=1e-5)


def test_transductive_fully_labeled_and_perfect_model():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(10, 2))
    y = X @ np.array([1.0, -1.0]) + 2.0
    dataset = _dataset(X, y)
    poor = RidgeModel(w=np.zeros(2), b=0.0, sigma=0.01)
    perfect = RidgeModel(w=np.array([1.0, -1.0]), b=2.0, sigma=0.01)

    full = transductive_metrics(dataset, np.arange(10), list(range(10)), poor)
    assert full.rmse == 0.0 and full.cc == pytest.approx(1.0)
    assert transductive_metrics(dataset, np.arange(10), [4], perfect).rmse == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError, match="belong to the pool"):
        transductive_metrics(dataset, np.arange(5), [7], poor)


def test_inductive_metrics():
    X = np.array([[0.0], [1.0], [2.0], [3.0], [4.0]])
    y = np.array([1.0, 3.0, 2.0, 5.0, 4.0])
    dataset = _dataset(X, y)

    shifted = inductive_metrics(dataset, np.arange(5), RidgeModel(w=np.array([0.8]), b=1.7, sigma=0.01))
    y_pred = 0.8 * X[:, 0] + 1.7
    expected_rmse = math.sqrt(sum((a - b) ** 2 for a, b in zip(y, y_pred)) / 5)
    ym, pm = sum(y) / 5, sum(y_pred) / 5
    cov = sum((a - ym) * (b - pm) for a, b in zip(y, y_pred))
    expected_cc = cov / math.sqrt(sum((a - ym) ** 2 for a in y) * sum((b - pm) ** 2 for b in y_pred))
    assert shifted.rmse == pytest.approx(expected_rmse, abs=1e-12)
    assert shifted.cc == pytest.approx(expected_cc, abs=1e-12)

    line = _dataset(X, 2.0 * X[:, 0])
    offset = inductive_metrics(line, np.arange(5), RidgeModel(w=np.array([2.0]), b=0.75, sigma=0.01))
    assert offset.rmse == pytest.approx(0.75)
    assert offset.cc == pytest.approx(1.0)


def test_correlation_undefined_for_constant_vector():
    assert math.isnan(correlation([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]))
    metrics = inductive_metrics(_dataset(np.ones((3, 1)), [1.0, 2.0, 3.0]), np.arange(3), RidgeModel(np.zeros(1), 0.0, 0.01))
    assert not metrics.cc_defined


def test_compute_auc():
    assert compute_auc([3.0, 3.0, 3.0]) == pytest.approx(6.0)
    assert compute_auc(np.linspace(1.0, 4.0, 11)) == pytest.approx((1.0 + 4.0) * 10 / 2)
    curve = np.sin(np.linspace(0, 1, 6))
    assert compute_auc(curve) == pytest.approx(np.sum((curve[1:] + curve[:-1]) / 2))
    with pytest.raises(ValueError):
        compute_auc([1.0])


def test_normalize_and_rank_reproduces_table_row():
    aucs = pd.DataFrame(
        [[1.0, 0.99, 0.98, 0.97, 0.96, 0.80, 0.95, 0.85, 0.90]], index=["Concrete-CS"], columns=TABLE_ORDER
    )
    table = normalize_and_rank(aucs, "rmse_t")
    assert table.ranks.loc["Concrete-CS"].tolist() == [9, 8, 7, 6, 5, 1, 4, 2, 3]
    assert table.normalized["BL"].tolist() == [1.0]

    cc = normalize_and_rank(aucs, "cc_t")
    assert cc.ranks.loc["Concrete-CS"].tolist() == [1, 2, 3, 4, 5, 9, 6, 8, 7]


def test_normalize_and_rank_ties_and_average_rows():
    aucs = pd.DataFrame(np.full((2, 9), 3.0), index=["a", "b"], columns=TABLE_ORDER)
    table = normalize_and_rank(aucs, "rmse_i")
    assert (table.ranks.to_numpy() == 5.0).all()

    aucs.loc["b", "RD"] = 1.0
    table = normalize_and_rank(aucs, "rmse_i")
    with_average = table.with_average()
    assert with_average.index.tolist() == ["a", "b", AVERAGE_ROW, RANK_OF_AVERAGE_ROW]
    assert with_average.loc[AVERAGE_ROW, "RD"] == pytest.approx(3.0)
    assert with_average.loc[RANK_OF_AVERAGE_ROW, "RD"] == 1.0


def test_normalize_and_rank_errors():
    with pytest.raises(ValueError, match="missing"):
        normalize_and_rank(pd.DataFrame([[1.0]], index=["a"], columns=["RD"]), "rmse_t")
    with pytest.raises(ValueError, match="zero"):
        normalize_and_rank(pd.DataFrame([[0.0, 1.0]], index=["a"], columns=["BL", "RD"]), "rmse_t")


def _runs_frame():
    rows = []
    for strategy, scale in (("BL", 1.0), ("RD", 0.5)):
        for run in range(2):
            for m in range(2, 5):
                cc = np.nan if (strategy == "RD" and run == 1 and m == 2) else 0.5
                rows.append(
                    {"dataset": "toy", "strategy": strategy, "run": run, "m": m,
                     "rmse_t": scale * (m + run), "cc_t": cc, "rmse_i": scale, "cc_i": 0.25}
                )
    return pd.DataFrame(rows)


def test_summarize(caplog):
    with caplog.at_level(logging.WARNING):
        table = summarize(_runs_frame().iloc[::-1], ["BL", "RD"])

    assert "1 undefined CC" in caplog.text
    bl = table.curves[table.curves["strategy"] == "BL"]
    assert bl["m"].tolist() == [2, 3, 4]
    assert bl["rmse_t"].tolist() == [2.5, 3.5, 4.5]
    rd = table.curves[table.curves["strategy"] == "RD"]
    assert rd["cc_t"].tolist() == [0.5, 0.5, 0.5]
    assert rd["cc_t_undefined"].tolist() == [1, 0, 0]

    rmse = table.auc_matrix("rmse_t")
    assert rmse.loc["toy", "BL"] == pytest.approx(7.0)
    assert table.auc_matrix("rmse_t", normalized=True).loc["toy"].tolist() == [1.0, 0.5]
    assert table.rankings["rmse_t"].ranks.loc["toy"].tolist() == [2.0, 1.0]

    per_run = table.run_auc[(table.run_auc["metric"] == "rmse_t")]
    assert per_run["normalized_auc"].tolist() == [1.0, 1.0, 0.5, 0.5]

    summary = table.summary()
    assert summary["cc_undefined"]["RD"] == {"cc_t_undefined": 1, "cc_i_undefined": 0}
    assert summary["ranks"]["rmse_t"]["mean_rank"] == {"BL": 2.0, "RD": 1.0}


def test_summarize_without_baseline_leaves_auc_unnormalized(caplog):
    frame = _runs_frame()
    frame = frame[frame["strategy"] == "RD"]
    with caplog.at_level(logging.WARNING):
        table = summarize(frame, ["RD"])
    assert table.rankings == {}
    assert table.auc["normalized_auc"].isna().all()
    assert "not among the strategies" in caplog.text


def test_results_table_merge_keeps_dataset_order():
    first = summarize(_runs_frame(), ["BL", "RD"])
    other = _runs_frame().assign(dataset="second")
    merged = ResultsTable.merge([first, summarize(other, ["BL", "RD"])])
    assert merged.datasets == ["toy", "second"]
    assert merged.rankings["rmse_t"].ranks.index.tolist() == ["toy", "second"]


def test_project_pca2_axis_aligned():
    X = np.array([[2.0, 0.0], [-2.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    np.testing.assert_allclose(project_pca2(X), X, atol=1e-12)


def test_project_pca2_three_point_fixture():
    projected = project_pca2(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]]))
    np.testing.assert_allclose(projected[:, 0], [-1.0, 0.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(projected[:, 1], [-1 / 3, 2 / 3, -1 / 3], atol=1e-12)


def test_project_pca2_variance_order_and_sign():
    X = np.random.default_rng(0).normal(size=(50, 4)) * np.array([1.0, 3.0, 0.5, 2.0])
    projected = project_pca2(X)
    assert projected[:, 0].var() >= projected[:, 1].var()
    assert projected.shape == (50, 2)


def test_project_pca2_rank_deficient(caplog):
    X = np.outer(np.arange(5.0), [1.0, 2.0])
    with caplog.at_level(logging.WARNING):
        projected = project_pca2(X)
    assert "rank < 2" in caplog.text
    np.testing.assert_array_equal(projected[:, 1], np.zeros(5))
    with pytest.raises(ValueError):
        project_pca2(np.ones((5, 1)))
    with pytest.raises(ValueError):
        project_pca2(np.eye(2))


def test_selection_frame():
    projected = np.arange(16, dtype=float).reshape(8, 2)
    frame = selection_frame(projected, [0, 1, 3, 4, 6, 7], [3, 1, 4], step=2)
    assert frame["sample"].tolist() == [0, 1, 3, 4, 6, 7]
    assert frame["selected"].tolist() == [0, 1, 1, 0, 0, 0]
    assert frame["selection_step"].tolist()[1:3] == [2, 1]
    assert frame["selection_step"].isna().sum() == 4
    assert frame.loc[frame["sample"] == 3, "pc1"].item() == 6.0


def test_execute_run_shares_split_and_records_curves():
    dataset = make_two_blobs(n=60, d=3, seed=1)
    config = _config(["BL", "RD", "RD-EMCM"])
    results = execute_run(dataset, config, 1)
    pool, test = run_split(dataset, config, 1)

    assert [r.strategy for r in results] == ["BL", "RD", "RD-EMCM"]
    for result in results:
        assert result.pool == pool.tolist()
        assert result.test == test.tolist()
        assert result.seed == 1
        assert len(result.query_order) == 20
        assert set(result.query_order) <= set(result.pool)
        assert result.steps == list(range(3, 21))
        assert len(result.rmse_t) == len(result.cc_i) == 18
        assert all(v >= 0 for v in result.rmse_t)


def test_run_result_dict_round_trip_restores_nan():
    result = RunResult(
        dataset="toy", strategy="BL", kind="BL", run=0, seed=0, pool=[0, 1], test=[2], query_order=[1, 0],
        steps=[1, 2], rmse_t=[1.0, 0.0], cc_t=[None, 1.0], rmse_i=[1.0, 1.0], cc_i=[0.5, 0.5],
    )
    restored = RunResult.from_dict(result.to_dict())
    assert math.isnan(restored.cc_t[0])
    assert restored.to_frame()["m"].tolist() == [1, 2]


def test_run_experiment_baseline_only():
    table = run_experiment(_config(["BL"], runs=1), make_two_blobs(n=60, d=3, seed=2))
    assert set(table.curves["strategy"]) == {"BL"}
    assert (table.auc["normalized_auc"] == 1.0).all()


def test_run_experiment_identical_specs_give_identical_curves():
    config = _config([{"kind": "RD-EMCM", "name": "first"}, {"kind": "RD-EMCM", "name": "second"}, "BL"])
    table = run_experiment(config, make_two_blobs(n=60, d=3, seed=3))
    first = table.curves[table.curves["strategy"] == "first"]
    second = table.curves[table.curves["strategy"] == "second"]
    for metric in ("rmse_t", "cc_t", "rmse_i", "cc_i"):
        assert first[metric].tolist() == second[metric].tolist()


def test_run_experiment_independent_of_jobs():
    config = _config(["BL", "GS", "RD"], runs=3)
    dataset = make_two_blobs(n=60, d=3, seed=4)
    serial = run_experiment(config, dataset, jobs=1)
    parallel = run_experiment(config, dataset, jobs=2)
    pd.testing.assert_frame_equal(serial.runs, parallel.runs)
    pd.testing.assert_frame_equal(serial.auc, parallel.auc)
