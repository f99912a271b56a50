# src/reduction/overlap.py
"""Pairwise product-state overlaps: C_Norm and the mean squared overlap diagnostic."""
import logging
import math
from typing import Optional, Tuple

import numpy as np

from src.errors import CapacityError, NumericalError
from src.featuremap import LocalFeatureMap, evaluate
from src.mps import MPS, log_norm, product_overlaps
from src.reduction.plan import DEFAULT_MAX_PAIRS

logger = logging.getLogger(__name__)

_ROW_CHUNK = 256


def pairwise_log_gram(fmap: LocalFeatureMap, xs_a, xs_b) -> Tuple[np.ndarray, np.ndarray]:
    """
    <Phi(a_i)|Phi(b_j)> for all pairs, as log-magnitudes and unit phases.

    The product over sites is accumulated in the log domain so long images do
    not underflow.
    """
    phi_a = np.conj(evaluate(fmap, np.asarray(xs_a, dtype=np.float64)))
    phi_b = evaluate(fmap, np.asarray(xs_b, dtype=np.float64))
    log_mag = np.zeros((phi_a.shape[0], phi_b.shape[0]))
    phase = np.ones_like(log_mag, dtype=np.complex128)
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(phi_a.shape[1]):
            g = phi_a[:, k, :] @ phi_b[:, k, :].T
            mag = np.abs(g)
            log_mag += np.log(mag)
            phase *= np.where(mag > 0, g / mag, 1.0)
    return log_mag, phase


def log_self_norms(fmap: LocalFeatureMap, xs) -> np.ndarray:
    """log <Phi(x_i)|Phi(x_i)> per row"""
    phi = evaluate(fmap, np.asarray(xs, dtype=np.float64))
    with np.errstate(divide="ignore"):
        return np.sum(np.log(np.sum(np.abs(phi) ** 2, axis=-1)), axis=-1)


def log_sum(log_mag: np.ndarray, phase: np.ndarray) -> Tuple[float, complex]:
    """log|sum| and the unit phase of sum(phase * exp(log_mag))"""
    log_mag = np.ravel(log_mag)
    if log_mag.size == 0 or not np.any(np.isfinite(log_mag)):
        return -math.inf, 1 + 0j
    ref = float(np.max(log_mag))
    total = complex(np.sum(np.ravel(phase) * np.exp(log_mag - ref)))
    if total == 0:
        return -math.inf, 1 + 0j
    return ref + math.log(abs(total)), total / abs(total)


def _log_pair_sum(fmap: LocalFeatureMap, xs: np.ndarray, exclude_diagonal: bool) -> Tuple[float, complex]:
    """log of sum_ij <Phi_i|Phi_j>, chunked over rows."""
    parts_mag = []
    parts_phase = []
    for lo in range(0, len(xs), _ROW_CHUNK):
        log_mag, phase = pairwise_log_gram(fmap, xs[lo:lo + _ROW_CHUNK], xs)
        if exclude_diagonal:
            rows = np.arange(log_mag.shape[0])
            log_mag[rows, lo + rows] = -np.inf
        m, p = log_sum(log_mag, phase)
        parts_mag.append(m)
        parts_phase.append(p)
    return log_sum(np.asarray(parts_mag), np.asarray(parts_phase))


def _real_log(log_mag: float, phase: complex, what: str) -> float:
    """log of a sum that must be real and positive"""
    if log_mag == -math.inf:
        return -math.inf
    if phase.real <= 0:
        raise NumericalError(f"{what} is not positive (phase {phase:.3g})")
    return log_mag + math.log(phase.real)


def log_cnorm(fmap: LocalFeatureMap, images, max_pairs: int = DEFAULT_MAX_PAIRS, subset: bool = False,
              rng: Optional[np.random.Generator] = None) -> float:
    """
    ln C_Norm with C_Norm^2 = sum_ij <Phi(x_i)|Phi(x_j)>.

    Above ``max_pairs`` pairwise terms the exact sum is refused unless
    ``subset`` is set. The estimate then keeps the diagonal exact and scales the
    off-diagonal sum of a random subset of floor(sqrt(max_pairs)) images by
    n(n-1) / (m(m-1)).
    """
    xs = np.asarray(images, dtype=np.float64)
    n = len(xs)
    if n * n <= max_pairs:
        log_mag, phase = _log_pair_sum(fmap, xs, exclude_diagonal=False)
        return 0.5 * _real_log(log_mag, phase, "C_Norm^2")
    if not subset:
        raise CapacityError(f"{n * n} pairwise overlaps exceed the cap of {max_pairs}; enable the subset estimate")
    m = max(2, math.isqrt(max_pairs))
    rng = rng if rng is not None else np.random.default_rng()
    pick = np.sort(rng.choice(n, size=m, replace=False))
    logger.info(f"Estimating C_Norm from {m} of {n} images")
    diag = log_self_norms(fmap, xs)
    off_mag, off_phase = _log_pair_sum(fmap, xs[pick], exclude_diagonal=True)
    off_mag += math.log(n * (n - 1)) - math.log(m * (m - 1))
    log_mag, phase = log_sum(np.append(diag, off_mag), np.append(np.ones(n, np.complex128), off_phase))
    return 0.5 * _real_log(log_mag, phase, "estimated C_Norm^2")


def mean_sq_overlap(model: MPS, fmap: LocalFeatureMap, images, max_pairs: int = DEFAULT_MAX_PAIRS,
                    subset: bool = False, rng: Optional[np.random.Generator] = None) -> float:
    """
    |<model|Sigma>|^2 for the normalized exact sum Sigma of the image encodings.

    The magnitude factor of ``model`` is ignored. The numerator is a sum
    of n product overlaps; the normalization comes from ``log_cnorm``.
    """
    xs = np.asarray(images, dtype=np.float64)
    log_mag, phase = product_overlaps(model.direction(), fmap, xs)
    num, _ = log_sum(log_mag, phase)
    if num == -math.inf:
        return 0.0
    lc = log_cnorm(fmap, xs, max_pairs, subset, rng)
    return math.exp(2 * (num - lc - log_norm(model.direction())))
