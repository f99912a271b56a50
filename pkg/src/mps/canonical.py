# src/mps/canonical.py
"""Canonical forms, SVD and variational compression, Schmidt spectra."""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from src.errors import ContractViolation, DimensionError, DomainError
from src.mps.state import MPS, Canonical, inner
from src.tensor.core import RANK_EPS, lq, qr, svd, truncate

logger = logging.getLogger(__name__)

DEFAULT_EPS_CUT = RANK_EPS ** 2


def _normalize(t: np.ndarray) -> Tuple[np.ndarray, float]:
    """Scale ``t`` to unit Frobenius norm; returns the tensor and log of the removed norm."""
    n = float(np.linalg.norm(t))
    if n == 0.0:
        return t, 0.0
    return t / n, math.log(n)


def _left_sweep(sites: List[np.ndarray], stop: int) -> float:
    """Make sites [0, stop) left-isometric in place, pushing R factors rightwards."""
    log_acc = 0.0
    for i in range(stop):
        chi_l, d, chi_r = sites[i].shape
        q, r = qr(sites[i].reshape(chi_l * d, chi_r))
        r, lg = _normalize(r)
        log_acc += lg
        sites[i] = q.reshape(chi_l, d, q.shape[1])
        sites[i + 1] = np.tensordot(r, sites[i + 1], axes=(1, 0))
    return log_acc


def _right_sweep(sites: List[np.ndarray], stop: int) -> float:
    """Make sites (stop, N) right-isometric in place, pushing L factors leftwards."""
    log_acc = 0.0
    for i in range(len(sites) - 1, stop, -1):
        chi_l, d, chi_r = sites[i].shape
        l, q = lq(sites[i].reshape(chi_l, d * chi_r))
        l, lg = _normalize(l)
        log_acc += lg
        sites[i] = q.reshape(q.shape[0], d, chi_r)
        sites[i - 1] = np.tensordot(sites[i - 1], l, axes=(2, 0))
    return log_acc


def canonicalize(m: MPS, form: Union[str, Canonical] = Canonical.RIGHT,
                 center: Optional[int] = None) -> MPS:
    """
    Bring ``m`` into left, right or mixed canonical form.

    The orthogonality center ends with unit norm; every norm removed along the
    way is accumulated into ``log_scale`` so the represented state is unchanged.
    """
    form = Canonical(form)
    n = m.n_sites
    if form == Canonical.LEFT:
        center = n - 1
    elif form == Canonical.RIGHT:
        center = 0
    elif form == Canonical.MIXED:
        if center is None or not 0 <= center < n:
            raise DomainError(f"mixed canonical form needs a center in [0, {n}), got {center}")
    else:
        raise DomainError("cannot canonicalize to form 'none'")
    sites = list(m.sites)
    log_scale = m.log_scale
    log_scale += _left_sweep(sites, center)
    log_scale += _right_sweep(sites, center)
    sites[center], lg = _normalize(sites[center])
    log_scale += lg
    return MPS(tuple(sites), log_scale, form, center, m.map_id)


def compress_svd_profile(m: MPS, chi_max: int, eps_cut: float = DEFAULT_EPS_CUT) -> Tuple[MPS, np.ndarray]:
    """
    Truncate every bond to at most ``chi_max`` in one SVD sweep.

    The state is left-canonicalized first, so each truncation is
    Frobenius-optimal for the current bond. The result is right-canonical with
    unit-norm tensors and carries the norm of ``m`` in ``log_scale``.

    Also returns the discarded weight of every cut, indexed by the number of
    sites to its left (entries 0 and N stay zero). Each weight is relative to
    the state at the time of its cut, and the kept subspaces nest, so the
    fidelity of the result to ``m`` is the product of ``1 - w`` over the cuts.
    """
    if chi_max < 1:
        raise DimensionError(f"chi_max must be positive, got {chi_max}")
    left = canonicalize(m, Canonical.LEFT)
    sites = list(left.sites)
    profile = np.zeros(len(sites) + 1)
    for i in range(len(sites) - 1, 0, -1):
        chi_l, d, chi_r = sites[i].shape
        u, s, vh = svd(sites[i].reshape(chi_l, d * chi_r))
        total = float(np.sum(s ** 2))
        u, s, vh, weight = truncate(u, s, vh, chi_max, eps_cut)
        if total > 0:
            profile[i] = weight / total
            s = s / np.linalg.norm(s)
        sites[i] = vh.reshape(len(s), d, chi_r)
        sites[i - 1] = np.tensordot(sites[i - 1], u * s[np.newaxis, :], axes=(2, 0))
    sites[0], _ = _normalize(sites[0])
    logger.debug(f"compress_svd to chi={chi_max}: bonds {[t.shape[2] for t in sites[:-1]]}, "
                 f"discarded {profile[1:-1]}")
    return MPS(tuple(sites), left.log_scale, Canonical.RIGHT, 0, m.map_id), profile


def compress_svd(m: MPS, chi_max: int, eps_cut: float = DEFAULT_EPS_CUT) -> Tuple[MPS, float]:
    """``compress_svd_profile`` with the per-cut weights summed"""
    out, profile = compress_svd_profile(m, chi_max, eps_cut)
    return out, float(profile.sum())


@dataclass(frozen=True)
class VariationalFit:
    """Outcome of a one-site variational compression"""

    state: MPS
    fidelity: float
    sweeps: int
    converged: bool


def _right_env(out_site: np.ndarray, t_site: np.ndarray, env: np.ndarray) -> np.ndarray:
    # env[a', b'] over sites > i -> env[a, b] over sites >= i
    tmp = np.tensordot(t_site, env, axes=(2, 1))  # (b, s, a')
    return np.tensordot(np.conj(out_site), tmp, axes=([1, 2], [1, 2]))


def _left_env(env: np.ndarray, out_site: np.ndarray, t_site: np.ndarray) -> np.ndarray:
    tmp = np.tensordot(env, np.conj(out_site), axes=(0, 0))  # (b, s, a')
    return np.tensordot(tmp, t_site, axes=([0, 1], [0, 1]))


def _projected_site(left: np.ndarray, t_site: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Optimal center tensor: the target with all other sites projected onto the isometries."""
    tmp = np.tensordot(left, t_site, axes=(1, 0))  # (a, s, b')
    return np.tensordot(tmp, right, axes=(2, 1))  # (a, s, a')


def compress_variational(target: MPS, chi: int, max_sweeps: int = 2, tol: float = 1e-9,
                         initial: Optional[MPS] = None) -> VariationalFit:
    """
    Fit a bond-``chi`` MPS to ``target`` by alternating one-site least squares.

    Starts from ``compress_svd`` (or ``initial``); a sweep is a left-to-right
    pass followed by a right-to-left pass, and stops early once the fidelity
    gain of a sweep falls below ``tol``. The best iterate is returned as a
    unit-norm right-canonical state carrying the target norm in ``log_scale``.
    """
    t = canonicalize(target, Canonical.RIGHT)
    t_sites = t.sites
    n = t.n_sites
    if n == 1:
        return VariationalFit(MPS(t_sites, t.log_scale, Canonical.RIGHT, 0, target.map_id), 1.0, 0, True)
    if initial is None:
        initial, _ = compress_svd(t, chi)
    elif initial.canonical != Canonical.RIGHT:
        initial = canonicalize(initial, Canonical.RIGHT)
    out = list(initial.sites)
    best_fid = abs(inner(initial.direction(), t.direction()).value) ** 2
    best_sites = tuple(out)
    prev = best_fid
    converged = False
    sweeps = 0

    for sweeps in range(1, max_sweeps + 1):
        rights: List[Optional[np.ndarray]] = [None] * (n + 1)
        rights[n] = np.ones((1, 1), np.complex128)
        for i in range(n - 1, 0, -1):
            rights[i] = _right_env(out[i], t_sites[i], rights[i + 1])
        lefts: List[Optional[np.ndarray]] = [None] * (n + 1)
        lefts[0] = np.ones((1, 1), np.complex128)
        for i in range(n - 1):
            chi_l, d, _ = out[i].shape
            mcenter = _projected_site(lefts[i], t_sites[i], rights[i + 1])
            q, r = qr(mcenter.reshape(chi_l * d, -1))
            out[i] = q.reshape(chi_l, d, q.shape[1])
            out[i + 1] = np.tensordot(r, out[i + 1], axes=(1, 0))
            lefts[i + 1] = _left_env(lefts[i], out[i], t_sites[i])
        for i in range(n - 1, 0, -1):
            _, d, chi_r = out[i].shape
            mcenter = _projected_site(lefts[i], t_sites[i], rights[i + 1])
            l, q = lq(mcenter.reshape(-1, d * chi_r))
            out[i] = q.reshape(q.shape[0], d, chi_r)
            out[i - 1] = np.tensordot(out[i - 1], l, axes=(2, 0))
            rights[i] = _right_env(out[i], t_sites[i], rights[i + 1])
        mcenter = _projected_site(lefts[0], t_sites[0], rights[1])
        fid = float(np.linalg.norm(mcenter) ** 2)
        out[0], _ = _normalize(mcenter)
        if fid > best_fid:
            best_fid = fid
            best_sites = tuple(out)
        gain = fid - prev
        prev = fid
        logger.debug(f"variational sweep {sweeps}: fidelity {fid:.12f} (gain {gain:.2e})")
        if gain < tol:
            converged = True
            break
    if not converged:
        logger.debug(f"variational compression stopped after {sweeps} sweeps without reaching tol={tol}")
    state = MPS(best_sites, t.log_scale, Canonical.RIGHT, 0, target.map_id)
    return VariationalFit(state, min(best_fid, 1.0), sweeps, converged)


def schmidt_spectrum(m: MPS, cut: int) -> np.ndarray:
    """Singular values across the bond between sites ``cut - 1`` and ``cut`` of the normalized state"""
    if not 1 <= cut <= m.n_sites - 1:
        raise DomainError(f"cut must lie in [1, {m.n_sites - 1}], got {cut}")
    c = canonicalize(m, Canonical.MIXED, center=cut - 1)
    site = c.sites[cut - 1]
    chi_l, d, chi_r = site.shape
    _, s, _ = svd(site.reshape(chi_l * d, chi_r))
    norm = np.linalg.norm(s)
    if norm == 0:
        raise ContractViolation("the zero state has no Schmidt spectrum")
    return s / norm
