from .dunn import ComparisonReport, compare_strategies, dunn_pairwise, fdr_bh, observations
