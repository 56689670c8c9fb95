from .experiment import RunResult, evaluate_query_order, execute_run, run_experiment, run_fingerprint, run_split
from .metrics import (
    MetricPair,
    compute_budget,
    correlation,
    inductive_metrics,
    rmse,
    split_pool,
    transductive_metrics,
)
from .pca import project_pca2, selection_frame
from .tables import (
    AVERAGE_ROW,
    RANK_OF_AVERAGE_ROW,
    BASELINE,
    METRICS,
    RankTable,
    ResultsTable,
    compute_auc,
    normalize_and_rank,
    summarize,
)
