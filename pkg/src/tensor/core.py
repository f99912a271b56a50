# src/tensor/core.py
"""
Dense complex tensor arithmetic and matrix decompositions.

Every tensor handled by the toolkit is a C-ordered ``complex128`` numpy array;
``DenseTensor`` is the alias used in signatures. The functions here are pure:
they never modify their inputs.
"""
import logging
from typing import List, Sequence, Tuple

import numpy as np
import scipy.linalg

from src.errors import DimensionError, NumericalError

logger = logging.getLogger(__name__)

DenseTensor = np.ndarray

# Singular values below RANK_EPS * max(s) count as zero for rank decisions.
RANK_EPS = 1e-14


def as_tensor(data) -> DenseTensor:
    """Return ``data`` as a C-contiguous complex128 array (copying only when needed)."""
    return np.ascontiguousarray(data, dtype=np.complex128)


def check_finite(t: DenseTensor, what: str = "tensor") -> DenseTensor:
    if not np.all(np.isfinite(t)):
        raise NumericalError(f"non-finite entries in {what}", t.shape)
    return t


def contract(a: DenseTensor, b: DenseTensor, axis_pairs: Sequence[Tuple[int, int]]) -> DenseTensor:
    """
    Sum over the paired axes of ``a`` and ``b``.

    The result carries the unpaired axes of ``a`` followed by the unpaired
    axes of ``b``, both in their original order.
    """
    a = as_tensor(a)
    b = as_tensor(b)
    axes_a: List[int] = []
    axes_b: List[int] = []
    for ia, ib in axis_pairs:
        if not (-a.ndim <= ia < a.ndim and -b.ndim <= ib < b.ndim):
            raise DimensionError(f"axis pair ({ia}, {ib}) out of range for ranks {a.ndim} and {b.ndim}")
        if a.shape[ia] != b.shape[ib]:
            raise DimensionError(
                f"axis pair ({ia}, {ib}) has mismatched extents {a.shape[ia]} != {b.shape[ib]}"
            )
        axes_a.append(ia)
        axes_b.append(ib)
    out = np.tensordot(a, b, axes=(axes_a, axes_b))
    return check_finite(as_tensor(out), "contraction result")


def _require_matrix(m: DenseTensor, op: str) -> DenseTensor:
    m = as_tensor(m)
    if m.ndim != 2:
        raise DimensionError(f"{op} expects a rank-2 tensor, got shape {m.shape}")
    return m


def svd(m: DenseTensor) -> Tuple[DenseTensor, np.ndarray, DenseTensor]:
    """
    Thin SVD ``m = U @ diag(s) @ Vh`` with ``s`` real, nonnegative and nonincreasing.

    The divide-and-conquer driver is tried first; on non-convergence the
    slower but more robust ``gesvd`` driver is used before giving up.
    """
    m = _require_matrix(m, "svd")
    check_finite(m, "svd input")
    if m.size == 0:
        k = min(m.shape)
        return (np.zeros((m.shape[0], k), np.complex128), np.zeros(k),
                np.zeros((k, m.shape[1]), np.complex128))
    try:
        u, s, vh = scipy.linalg.svd(m, full_matrices=False, check_finite=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        logger.debug(f"gesdd failed on shape {m.shape}, retrying with gesvd")
        try:
            u, s, vh = scipy.linalg.svd(m, full_matrices=False, check_finite=False, lapack_driver="gesvd")
        except np.linalg.LinAlgError as e:
            raise NumericalError(f"SVD did not converge: {e}", m.shape) from e
    return as_tensor(u), np.asarray(s, dtype=np.float64), as_tensor(vh)


def truncate(u: DenseTensor, s: np.ndarray, vh: DenseTensor, chi_max: int,
             eps_cut: float = 0.0) -> Tuple[DenseTensor, np.ndarray, DenseTensor, float]:
    """
    Keep the leading singular triplets.

    ``k = min(chi_max, k_eps)`` values survive (never fewer than one), where
    ``k_eps`` is the smallest count whose trailing squared singular values sum
    to at most ``eps_cut * sum(s**2)``. With ``eps_cut == 0`` only ``chi_max``
    limits the rank. Ties at the boundary keep the computed order.

    Returns the kept triple and the discarded weight ``sum(s[k:]**2)``.
    """
    if chi_max < 1:
        raise DimensionError(f"chi_max must be positive, got {chi_max}")
    s = np.asarray(s, dtype=np.float64)
    n = len(s)
    k = min(chi_max, n)
    if eps_cut > 0 and n > 0:
        sq = s ** 2
        # tail[j] = sum(sq[j:]), tail[n] = 0
        tail = np.concatenate([np.cumsum(sq[::-1])[::-1], [0.0]])
        allowed = eps_cut * tail[0]
        k_eps = int(np.argmax(tail <= allowed))
        k = min(k, k_eps)
    k = max(k, 1) if n > 0 else 0
    discarded = float(np.sum(s[k:] ** 2))
    return u[:, :k], s[:k], vh[:k, :], discarded


def qr(m: DenseTensor) -> Tuple[DenseTensor, DenseTensor]:
    """Thin QR with a real nonnegative diagonal on ``R`` (unique for full-rank input)."""
    m = _require_matrix(m, "qr")
    check_finite(m, "qr input")
    q, r = scipy.linalg.qr(m, mode="economic", check_finite=False)
    diag = np.diagonal(r)
    mag = np.abs(diag)
    phases = np.ones_like(diag)
    nz = mag > 0
    phases[nz] = diag[nz] / mag[nz]
    q = q * phases[np.newaxis, :]
    r = np.conj(phases)[:, np.newaxis] * r
    return as_tensor(q), as_tensor(r)


def lq(m: DenseTensor) -> Tuple[DenseTensor, DenseTensor]:
    """``m = L @ Q`` with ``Q`` having orthonormal rows, via QR of the adjoint."""
    q, r = qr(np.conj(_require_matrix(m, "lq")).T)
    return as_tensor(np.conj(r).T), as_tensor(np.conj(q).T)
