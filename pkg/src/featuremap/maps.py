# src/featuremap/maps.py
"""
Local feature maps phi^s(x) on [0, 1].

All built-in maps integrate against the measure density w(x) = 2, under which
the phased, indicator and sine maps are orthonormal.
"""
import functools
import logging
import re
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy.integrate import simpson

from src.errors import ConfigError, DomainError

logger = logging.getLogger(__name__)

MEASURE_DENSITY = 2.0
DEFAULT_QUADRATURE_POINTS = 10_000
_GAUSS_ORDER = 32


def _uniform_density(x: np.ndarray) -> np.ndarray:
    return np.full(np.shape(x), MEASURE_DENSITY)


@dataclass(frozen=True)
class LocalFeatureMap:
    """A d-component complex feature map together with its integration measure"""

    id: str
    d: int
    components: Callable[[np.ndarray], np.ndarray]
    claims_orthonormal: bool
    claims_normalized: bool
    measure_density: Callable[[np.ndarray], np.ndarray] = _uniform_density
    # Discontinuities of the components; integration splits the interval here.
    breakpoints: Tuple[float, ...] = ()

    def __repr__(self) -> str:
        return f"LocalFeatureMap(id={self.id!r}, d={self.d})"


def _cos_sin(x: np.ndarray) -> np.ndarray:
    return np.stack([np.cos(np.pi * x / 2), np.sin(np.pi * x / 2)], axis=-1).astype(np.complex128)


def _phased(x: np.ndarray) -> np.ndarray:
    phase = np.exp(1j * (3 * np.pi / 2) * x)
    return np.stack([phase * np.cos(np.pi * x / 2), np.conj(phase) * np.sin(np.pi * x / 2)], axis=-1)


def _indicator(x: np.ndarray) -> np.ndarray:
    return np.stack([x < 0.5, x >= 0.5], axis=-1).astype(np.complex128)


def _sine_basis(n: int) -> Callable[[np.ndarray], np.ndarray]:
    k = np.arange(1, n + 1)

    def components(x: np.ndarray) -> np.ndarray:
        return np.sin(np.pi * np.multiply.outer(x, k)).astype(np.complex128)

    return components


COS_SIN = LocalFeatureMap("cos-sin", 2, _cos_sin, claims_orthonormal=False, claims_normalized=True)
PHASED = LocalFeatureMap("phased", 2, _phased, claims_orthonormal=True, claims_normalized=True)
INDICATOR = LocalFeatureMap("indicator", 2, _indicator, claims_orthonormal=True, claims_normalized=True,
                            breakpoints=(0.5,))

_SINE_ID = re.compile(r"^sin-(\d+)$")


@functools.lru_cache(maxsize=None)
def sine_basis(n: int) -> LocalFeatureMap:
    if n < 1:
        raise ConfigError(f"sine basis needs at least one component, got {n}")
    return LocalFeatureMap(f"sin-{n}", n, _sine_basis(n), claims_orthonormal=True, claims_normalized=False)


@functools.lru_cache(maxsize=None)
def get_feature_map(map_id: str) -> LocalFeatureMap:
    """Resolve a map id: ``cos-sin``, ``phased``, ``indicator`` or ``sin-N``"""
    builtin = {m.id: m for m in (COS_SIN, PHASED, INDICATOR)}
    if map_id in builtin:
        return builtin[map_id]
    match = _SINE_ID.match(map_id)
    if match:
        return sine_basis(int(match.group(1)))
    raise ConfigError(f"Unknown feature map id: {map_id!r}")


def _check_domain(x: np.ndarray) -> None:
    if not np.all((x >= 0.0) & (x <= 1.0)):
        bad = x[~((x >= 0.0) & (x <= 1.0))]
        raise DomainError(f"feature map input outside [0, 1]: {bad.ravel()[:5].tolist()}")


def evaluate(fmap: LocalFeatureMap, x) -> np.ndarray:
    """phi(x) for a scalar (shape ``(d,)``) or an array of inputs (shape ``x.shape + (d,)``)"""
    x = np.asarray(x, dtype=np.float64)
    _check_domain(x)
    return np.asarray(fmap.components(x), dtype=np.complex128)


def gauss_nodes(edges, order: int = _GAUSS_ORDER) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on every interval between consecutive ``edges``"""
    edges = np.asarray(edges, dtype=np.float64)
    g, gw = np.polynomial.legendre.leggauss(order)
    a = edges[:-1, np.newaxis]
    half = (edges[1:] - edges[:-1])[:, np.newaxis] / 2
    return (a + half * (g + 1)).ravel(), (half * gw).ravel()


def gram(fmap: LocalFeatureMap, quadrature_points: int = DEFAULT_QUADRATURE_POINTS) -> np.ndarray:
    """
    G[s, s'] = integral of conj(phi^s) phi^s' w over [0, 1].

    Smooth maps use composite Simpson on ``quadrature_points`` intervals;
    piecewise maps are integrated exactly piece by piece.
    """
    if quadrature_points < 64:
        raise DomainError(f"gram needs at least 64 quadrature points, got {quadrature_points}")
    if fmap.breakpoints:
        xs, ws = gauss_nodes([0.0, *fmap.breakpoints, 1.0])
        phi = evaluate(fmap, xs)
        return np.einsum("ns,nt,n->st", np.conj(phi), phi, fmap.measure_density(xs) * ws)
    intervals = quadrature_points + (quadrature_points % 2)
    xs = np.linspace(0.0, 1.0, intervals + 1)
    phi = evaluate(fmap, xs)
    integrand = np.einsum("ns,nt,n->nst", np.conj(phi), phi, fmap.measure_density(xs))
    return simpson(integrand, x=xs, axis=0)


def check_normalization(fmap: LocalFeatureMap, sample_xs) -> float:
    """Largest deviation of sum_s |phi^s(x)|^2 from one over the given points"""
    phi = evaluate(fmap, np.asarray(sample_xs, dtype=np.float64))
    return float(np.max(np.abs(np.sum(np.abs(phi) ** 2, axis=-1) - 1.0)))


def smooth_delta(fmap: LocalFeatureMap, xi: float, xs) -> np.ndarray:
    """Psi(x) = sum_s phi^s(x) conj(phi^s(xi)): the delta at xi projected on the finite basis"""
    centre = evaluate(fmap, float(xi))
    return evaluate(fmap, np.asarray(xs, dtype=np.float64)) @ np.conj(centre)


def half_max_width(xs, values) -> float:
    """Width of the contiguous region around the |values| peak that stays above half the peak"""
    xs = np.asarray(xs, dtype=np.float64)
    mag = np.abs(np.asarray(values))
    peak = int(np.argmax(mag))
    half = mag[peak] / 2
    left = peak
    while left > 0 and mag[left - 1] >= half:
        left -= 1
    right = peak
    while right < len(mag) - 1 and mag[right + 1] >= half:
        right += 1
    return float(xs[right] - xs[left])
