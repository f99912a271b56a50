# src/mps/state.py
"""
The matrix-product-state value type and its linear algebra.

An ``MPS`` represents ``exp(log_scale) * contraction(sites)``. Site tensors
have shape ``(chi_left, d, chi_right)``; the boundary bonds have extent one.
Magnitudes are kept in ``log_scale`` so that products over hundreds of sites
neither underflow nor overflow.
"""
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from src.errors import CapacityError, DimensionError, DomainError, EmptyInputError
from src.featuremap.maps import LocalFeatureMap, evaluate
from src.tensor.core import as_tensor, check_finite

logger = logging.getLogger(__name__)

DENSE_LIMIT = 2 ** 20
# Operands more than this many e-folds smaller than their partner are dropped by add().
ADD_DROP_LOG_GAP = 200.0

SpinConfig = np.ndarray


class Canonical(str, Enum):
    NONE = "none"
    LEFT = "left"
    RIGHT = "right"
    MIXED = "mixed"


class Overlap(NamedTuple):
    """A complex number stored as log-magnitude and unit phase"""

    log_magnitude: float
    phase: complex

    @property
    def value(self) -> complex:
        if self.log_magnitude == -math.inf:
            return 0j
        return self.phase * math.exp(self.log_magnitude)

    @property
    def is_zero(self) -> bool:
        return self.log_magnitude == -math.inf


ZERO_OVERLAP = Overlap(-math.inf, 1 + 0j)


@dataclass(frozen=True, eq=False)
class MPS:
    """An open-boundary matrix product state"""

    sites: tuple
    log_scale: float = 0.0
    canonical: Canonical = Canonical.NONE
    center: Optional[int] = None
    map_id: Optional[str] = None

    def __post_init__(self):
        if len(self.sites) == 0:
            raise EmptyInputError("an MPS needs at least one site")
        frozen = []
        for k, site in enumerate(self.sites):
            t = as_tensor(site)
            if t.ndim != 3:
                raise DimensionError(f"site {k} has rank {t.ndim}, expected 3")
            if t.flags.writeable:
                t = t.copy()
                t.flags.writeable = False
            frozen.append(check_finite(t, f"site {k}"))
        if frozen[0].shape[0] != 1 or frozen[-1].shape[2] != 1:
            raise DimensionError("boundary bonds must have extent 1")
        for k in range(len(frozen) - 1):
            if frozen[k].shape[2] != frozen[k + 1].shape[0]:
                raise DimensionError(
                    f"bond {k + 1} mismatch: {frozen[k].shape[2]} != {frozen[k + 1].shape[0]}"
                )
        if not math.isfinite(self.log_scale):
            raise DomainError(f"log_scale must be finite, got {self.log_scale}")
        object.__setattr__(self, "sites", tuple(frozen))
        object.__setattr__(self, "log_scale", float(self.log_scale))
        object.__setattr__(self, "canonical", Canonical(self.canonical))
        if self.canonical == Canonical.LEFT:
            object.__setattr__(self, "center", len(frozen) - 1)
        elif self.canonical == Canonical.RIGHT:
            object.__setattr__(self, "center", 0)
        elif self.canonical == Canonical.NONE:
            object.__setattr__(self, "center", None)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def phys_dims(self) -> List[int]:
        return [t.shape[1] for t in self.sites]

    @property
    def bond_dims(self) -> List[int]:
        """Extents chi_0 .. chi_N, boundaries included"""
        return [self.sites[0].shape[0]] + [t.shape[2] for t in self.sites]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims)

    def with_log_scale(self, log_scale: float) -> "MPS":
        return replace(self, log_scale=log_scale)

    def direction(self) -> "MPS":
        """The same tensors with the magnitude factor dropped"""
        return self.with_log_scale(0.0)


def _check_compatible(a: MPS, b: MPS) -> None:
    if a.n_sites != b.n_sites:
        raise DimensionError(f"site counts differ: {a.n_sites} != {b.n_sites}")
    if a.phys_dims != b.phys_dims:
        raise DimensionError("physical dimensions differ")


def _encode(fmap: LocalFeatureMap, xs: np.ndarray):
    """Unit local vectors and per-image log norms for a (k, N) block of images."""
    vecs = evaluate(fmap, xs)
    norms = np.linalg.norm(vecs, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        unit = np.where(norms[..., np.newaxis] > 0, vecs / norms[..., np.newaxis], 0)
        logs = np.sum(np.log(norms), axis=-1)
    return unit, logs


def product_state(fmap: LocalFeatureMap, x) -> MPS:
    """The chi = 1 encoding Phi(x) = phi(x_1) (x) ... (x) phi(x_N)"""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise DimensionError(f"product_state expects a nonempty vector, got shape {x.shape}")
    unit, log_norm = _encode(fmap, x[np.newaxis, :])
    sites = [v.reshape(1, fmap.d, 1) for v in unit[0]]
    if not np.isfinite(log_norm[0]):
        # some site vector vanishes: the encoded state is zero
        return MPS(tuple(sites), 0.0, Canonical.NONE, map_id=fmap.id)
    return MPS(tuple(sites), float(log_norm[0]), Canonical.RIGHT, map_id=fmap.id)


def sum_product_states(fmap: LocalFeatureMap, xs) -> MPS:
    """
    The exact unnormalized sum of the product encodings of the rows of ``xs``.

    Builds the block-diagonal tensors directly; the result is identical to
    folding ``add`` over the individual product states.
    """
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[0] == 0:
        raise EmptyInputError(f"need a nonempty (k, N) block of images, got shape {xs.shape}")
    if xs.shape[0] == 1:
        return product_state(fmap, xs[0])
    k, n = xs.shape
    d = fmap.d
    unit, logs = _encode(fmap, xs)
    alive = np.isfinite(logs)
    if not np.any(alive):
        return product_state(fmap, xs[0])
    ref = float(np.max(logs[alive]))
    coef = np.where(alive, np.exp(np.where(alive, logs, ref) - ref), 0.0)
    if n == 1:
        site = np.einsum("i,is->s", coef, unit[:, 0, :]).reshape(1, d, 1)
        return MPS((site,), ref, map_id=fmap.id)
    idx = np.arange(k)
    sites = []
    first = np.zeros((1, d, k), np.complex128)
    first[0, :, :] = (coef[:, np.newaxis] * unit[:, 0, :]).T
    sites.append(first)
    for j in range(1, n - 1):
        mid = np.zeros((k, d, k), np.complex128)
        mid[idx, :, idx] = unit[:, j, :]
        sites.append(mid)
    last = np.zeros((k, d, 1), np.complex128)
    last[:, :, 0] = unit[:, n - 1, :]
    sites.append(last)
    return MPS(tuple(sites), ref, map_id=fmap.id)


def is_zero_state(m: MPS) -> bool:
    """True when some site tensor vanishes identically"""
    return any(not np.any(site) for site in m.sites)


def add(a: MPS, b: MPS) -> MPS:
    """
    The exact sum a + b with bond dimensions adding at every interior cut.

    A zero operand (some site tensor identically zero) is ignored. Otherwise
    the operand with the smaller ``log_scale`` is rescaled into the frame of the
    larger one; if it is more than ``ADD_DROP_LOG_GAP`` e-folds smaller it is
    numerically zero and dropped.
    """
    _check_compatible(a, b)
    map_id = a.map_id if a.map_id == b.map_id else None
    # a zero operand carries no magnitude, whatever its log_scale says
    if is_zero_state(b):
        return replace(a, map_id=map_id)
    if is_zero_state(a):
        return replace(b, map_id=map_id)
    if a.log_scale < b.log_scale:
        big, small, swapped = b, a, True
    else:
        big, small, swapped = a, b, False
    gap = big.log_scale - small.log_scale
    if gap > ADD_DROP_LOG_GAP:
        logger.warning(f"add: dropping operand {gap:.1f} e-folds below its partner")
        return replace(big, map_id=map_id)
    factor = math.exp(-gap)
    fa, fb = (factor, 1.0) if swapped else (1.0, factor)
    a_sites = list(a.sites)
    b_sites = list(b.sites)
    a_sites[0] = a_sites[0] * fa
    b_sites[0] = b_sites[0] * fb
    n = a.n_sites
    if n == 1:
        return MPS((a_sites[0] + b_sites[0],), big.log_scale, map_id=map_id)
    sites = [np.concatenate([a_sites[0], b_sites[0]], axis=2)]
    for A, B in zip(a_sites[1:-1], b_sites[1:-1]):
        la, d, ra = A.shape
        lb, _, rb = B.shape
        block = np.zeros((la + lb, d, ra + rb), np.complex128)
        block[:la, :, :ra] = A
        block[la:, :, ra:] = B
        sites.append(block)
    sites.append(np.concatenate([a_sites[-1], b_sites[-1]], axis=0))
    return MPS(tuple(sites), big.log_scale, map_id=map_id)


def to_dense(m: MPS) -> np.ndarray:
    """Full state vector (site 0 is the most significant index), magnitude included"""
    size = int(np.prod(m.phys_dims, dtype=np.float64))
    if size > DENSE_LIMIT:
        raise CapacityError(f"dense vector of {size} entries exceeds the {DENSE_LIMIT} limit")
    v = m.sites[0].reshape(-1, m.sites[0].shape[2])
    for site in m.sites[1:]:
        chi_l, d, chi_r = site.shape
        v = (v @ site.reshape(chi_l, d * chi_r)).reshape(-1, chi_r)
    return v[:, 0] * math.exp(m.log_scale)


def inner(a: MPS, b: MPS) -> Overlap:
    """<a|b> by a left-to-right transfer contraction rescaled at every site"""
    _check_compatible(a, b)
    env = np.ones((1, 1), np.complex128)
    acc = a.log_scale + b.log_scale
    for A, B in zip(a.sites, b.sites):
        # env[a, b] -> env[a', b']
        t = np.tensordot(env, np.conj(A), axes=(0, 0))
        env = np.tensordot(t, B, axes=([0, 1], [0, 1]))
        scale = np.max(np.abs(env))
        if scale == 0:
            return ZERO_OVERLAP
        env = env / scale
        acc += math.log(scale)
    val = complex(env[0, 0])
    mag = abs(val)
    if mag == 0:
        return ZERO_OVERLAP
    return Overlap(acc + math.log(mag), val / mag)


def log_norm(m: MPS) -> float:
    """Natural log of the 2-norm of the represented state (-inf for the zero state)"""
    return 0.5 * inner(m, m).log_magnitude


def amplitude(m: MPS, s: Sequence[int]) -> Overlap:
    """The coefficient of the basis configuration ``s``"""
    s = np.asarray(s)
    if s.ndim != 1 or len(s) != m.n_sites:
        raise DimensionError(f"configuration of length {len(s)} for {m.n_sites} sites")
    dims = np.asarray(m.phys_dims)
    if np.any(s < 0) or np.any(s >= dims):
        raise DomainError("configuration entry outside its physical range")
    v = np.ones(1, np.complex128)
    acc = m.log_scale
    for site, sk in zip(m.sites, s):
        v = v @ site[:, int(sk), :]
        scale = np.max(np.abs(v))
        if scale == 0:
            return ZERO_OVERLAP
        v = v / scale
        acc += math.log(scale)
    val = complex(v[0])
    return Overlap(acc + math.log(abs(val)), val / abs(val))


def amplitude_continuous(m: MPS, fmap: LocalFeatureMap, x) -> Overlap:
    """Psi(x) = <Phi(x)|m>, the model amplitude at a continuous input"""
    if any(d != fmap.d for d in m.phys_dims):
        raise DimensionError(f"map {fmap.id} has d={fmap.d}, state has {m.phys_dims[0]}")
    return inner(product_state(fmap, x), m)


def fidelity(a: MPS, b: MPS) -> float:
    """|<a|b>|^2 / (<a|a> <b|b>), scale-free"""
    ov = inner(a, b)
    if ov.is_zero:
        return 0.0
    return math.exp(2 * (ov.log_magnitude - log_norm(a) - log_norm(b)))


def product_overlaps(m: MPS, fmap: LocalFeatureMap, xs) -> Tuple[np.ndarray, np.ndarray]:
    """
    <Phi(x_i)|m> for every row of ``xs`` at once.

    Returns log-magnitudes (``-inf`` for vanishing overlaps) and unit phases.
    """
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != m.n_sites:
        raise DimensionError(f"images of shape {xs.shape} do not match {m.n_sites} sites")
    if any(d != fmap.d for d in m.phys_dims):
        raise DimensionError(f"map {fmap.id} has d={fmap.d}, state has {m.phys_dims[0]}")
    phi = np.conj(evaluate(fmap, xs))
    n = xs.shape[0]
    env = np.ones((n, 1), np.complex128)
    acc = np.full(n, m.log_scale)
    for k, site in enumerate(m.sites):
        branch = np.tensordot(env, site, axes=(1, 0))  # (n, s, b)
        env = np.einsum("nsb,ns->nb", branch, phi[:, k, :])
        scale = np.max(np.abs(env), axis=1)
        live = scale > 0
        env[live] /= scale[live, np.newaxis]
        with np.errstate(divide="ignore"):
            acc += np.log(scale)
    val = env[:, 0]
    mag = np.abs(val)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_mag = np.where(mag > 0, acc + np.log(mag), -np.inf)
        phase = np.where(mag > 0, val / mag, 1.0 + 0j)
    return log_mag, phase
