# src/reduction/reducer.py
"""
Building digit wavefunctions from images.

Two strategies are offered. ``direct_sum_compress`` builds the exact sum of
every product-state encoding and compresses it once. ``tree_reduce`` splits
the images into exact leaves of ``plan.batch`` images and folds them pairwise,
compressing after every addition, one tree level at a time.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from src.errors import CapacityError, EmptyInputError
from src.featuremap import LocalFeatureMap
from src.mps import MPS, add, compress_svd, compress_variational, sum_product_states
from src.reduction.plan import ReductionPlan

logger = logging.getLogger(__name__)


def _as_images(images) -> np.ndarray:
    xs = np.asarray(images, dtype=np.float64)
    if xs.size == 0:
        raise EmptyInputError(f"need a nonempty list of images, got shape {xs.shape}")
    if xs.ndim == 1:
        xs = xs[np.newaxis, :]
    if xs.ndim != 2 or xs.shape[0] == 0:
        raise EmptyInputError(f"need a nonempty list of images, got shape {xs.shape}")
    return xs


def exact_batch(fmap: LocalFeatureMap, xs) -> MPS:
    """The unnormalized sum of the encodings of ``xs``, bond dimension at most len(xs)"""
    return sum_product_states(fmap, _as_images(xs))


def _compress(state: MPS, plan: ReductionPlan) -> MPS:
    """SVD truncation to ``plan.chi``, polished variationally when anything was cut."""
    compressed, discarded = compress_svd(state, plan.chi)
    if plan.sweeps == 0 or discarded == 0.0:
        return compressed
    fit = compress_variational(state, plan.chi, max_sweeps=plan.sweeps, tol=plan.tol, initial=compressed)
    if not fit.converged:
        logger.debug(f"polish after {fit.sweeps} sweeps reached fidelity {fit.fidelity:.10f}")
    return fit.state


def reduce_pair(a: MPS, b: MPS, plan: ReductionPlan) -> MPS:
    """compress(a + b) to ``plan.chi``; unit tensors, the magnitude of the sum in log_scale"""
    return _compress(add(a, b), plan)


def tree_reduce(fmap: LocalFeatureMap, images, plan: ReductionPlan) -> MPS:
    """
    Fan-in reduction over exact leaves.

    Adjacent nodes are paired left to right at every level and an odd node at
    the end of a level is promoted unchanged, so the tree shape and operand
    order depend only on the number of images and ``plan.batch``. Same-level
    pairs run on up to ``plan.worker_limit`` threads; results are collected in
    submission order.
    """
    xs = _as_images(images)
    start = time.time()
    with ThreadPoolExecutor(max_workers=plan.worker_limit) as pool:
        leaves = np.split(xs, np.cumsum(chunk_sizes(len(xs), plan))[:-1])
        nodes = list(pool.map(lambda batch: exact_batch(fmap, batch), leaves))
        logger.info(f"Built {len(nodes)} exact leaves from {len(xs)} images (batch {plan.batch})")
        if len(nodes) == 1:
            return _compress(nodes[0], plan)
        level = 0
        while len(nodes) > 1:
            level += 1
            pairs = [(nodes[i], nodes[i + 1]) for i in range(0, len(nodes) - 1, 2)]
            reduced = list(pool.map(lambda pair: reduce_pair(pair[0], pair[1], plan), pairs))
            if len(nodes) % 2 == 1:
                reduced.append(nodes[-1])
            nodes = reduced
            logger.info(f"Tree level {level} done: {len(nodes)} nodes left ({time.time() - start:.1f}s)")
    return nodes[0]


def direct_sum_compress(fmap: LocalFeatureMap, images, plan: ReductionPlan) -> MPS:
    """Exact sum of all encodings, then one SVD plus variational compression to ``plan.chi``"""
    xs = _as_images(images)
    n_img, n_sites = xs.shape
    entries = n_img * n_img * fmap.d * n_sites
    if entries > plan.max_dense_entries:
        raise CapacityError(
            f"the exact sum of {n_img} images needs {entries} tensor entries, above the cap of "
            f"{plan.max_dense_entries}; use a subset of the images or the tree strategy"
        )
    exact = exact_batch(fmap, xs)
    logger.info(f"Exact sum of {n_img} images built (bond {exact.max_bond}), compressing to chi={plan.chi}")
    return _compress(exact, plan)


def reduce_images(fmap: LocalFeatureMap, images, plan: ReductionPlan) -> MPS:
    """Dispatch on ``plan.strategy``"""
    if plan.strategy == "direct":
        return direct_sum_compress(fmap, images, plan)
    return tree_reduce(fmap, images, plan)


def chunk_sizes(n_images: int, plan: ReductionPlan) -> Sequence[int]:
    """Leaf sizes of the tree strategy for ``n_images`` images, in order"""
    full, rest = divmod(n_images, plan.batch)
    return [plan.batch] * full + ([rest] if rest else [])
