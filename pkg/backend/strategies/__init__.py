from .initialization import centroid_representatives, ebmalr_outlier_filter, init_random, rd_initialize
from .pool import PoolState, StrategyError
from .runner import (
    ABLATION_STRATEGIES,
    MAIN_STRATEGIES,
    StrategyKind,
    StrategySpec,
    run_strategy,
)
from .selection import (
    emcm_scores,
    gs_scores,
    largest_labeled_free_cluster,
    qbc_scores,
    select_emcm,
    select_gs,
    select_qbc,
    select_rd,
)
