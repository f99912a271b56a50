from src.reduction.overlap import log_cnorm, log_sum, mean_sq_overlap, pairwise_log_gram
from src.reduction.plan import DEFAULT_MAX_DENSE_ENTRIES, DEFAULT_MAX_PAIRS, ReductionPlan, make_plan
from src.reduction.reducer import (
    chunk_sizes,
    direct_sum_compress,
    exact_batch,
    reduce_images,
    reduce_pair,
    tree_reduce,
)

__all__ = [
    "DEFAULT_MAX_DENSE_ENTRIES", "DEFAULT_MAX_PAIRS", "ReductionPlan", "chunk_sizes",
    "direct_sum_compress", "exact_batch", "log_cnorm", "log_sum", "make_plan", "mean_sq_overlap",
    "pairwise_log_gram", "reduce_images", "reduce_pair", "tree_reduce",
]
