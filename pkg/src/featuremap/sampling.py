# src/featuremap/sampling.py
"""Inverse-CDF sampling of x given the discrete component s, density |phi^s(x)|^2 w(x)."""
import functools
import logging
from typing import Optional, Tuple

import numpy as np

from src.errors import ContractViolation, DomainError
from src.featuremap.maps import LocalFeatureMap, evaluate, gauss_nodes

logger = logging.getLogger(__name__)

CDF_KNOTS = 4096
REFINE_TOL = 1e-10
_CELL_ORDER = 16
_MAX_BISECTIONS = 64


def _density(fmap: LocalFeatureMap, s: int, x: np.ndarray) -> np.ndarray:
    return np.abs(evaluate(fmap, x)[..., s]) ** 2 * fmap.measure_density(x)


@functools.lru_cache(maxsize=64)
def cdf_table(fmap: LocalFeatureMap, s: int) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Knots, normalized CDF values at the knots and the total mass.

    The cell masses are integrated with Gauss-Legendre, so a breakpoint sitting
    on a knot (0.5 for the indicator map) is integrated exactly.
    """
    knots = np.linspace(0.0, 1.0, CDF_KNOTS + 1)
    xs, ws = gauss_nodes(knots, _CELL_ORDER)
    cell_mass = (_density(fmap, s, xs) * ws).reshape(CDF_KNOTS, _CELL_ORDER).sum(axis=1)
    cdf = np.concatenate([[0.0], np.cumsum(cell_mass)])
    total = float(cdf[-1])
    logger.debug(f"CDF table for {fmap.id} component {s}: total mass {total:.12f}")
    return knots, cdf / total, total


def _partial_mass(fmap: LocalFeatureMap, s: int, a: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Integral of the density from a to t, elementwise."""
    g, gw = np.polynomial.legendre.leggauss(_CELL_ORDER)
    half = ((t - a) / 2)[:, np.newaxis]
    nodes = a[:, np.newaxis] + half * (g + 1)
    return (_density(fmap, s, np.clip(nodes, 0.0, 1.0)) * half * gw).sum(axis=1)


def conditional_cdf(fmap: LocalFeatureMap, s: int, x) -> np.ndarray:
    """CDF of x given s, interpolated from the knot table."""
    knots, cdf, _ = cdf_table(fmap, s)
    return np.interp(x, knots, cdf)


def sample_conditional(fmap: LocalFeatureMap, s: int, rng: np.random.Generator,
                       size: Optional[int] = None):
    """
    Draw x in [0, 1] with density |phi^s(x)|^2 w(x).

    The knot table locates the cell, linear interpolation gives the first
    split point and bisection on the exact partial integral refines it to
    ``REFINE_TOL``. Returns a float, or an array of ``size`` draws.
    """
    if not fmap.claims_orthonormal:
        raise ContractViolation(f"conditional sampling needs an orthonormal map, {fmap.id} is not")
    if not 0 <= s < fmap.d:
        raise DomainError(f"component {s} out of range for {fmap.id} (d={fmap.d})")
    knots, cdf, total = cdf_table(fmap, s)
    n = 1 if size is None else int(size)
    # u in (0, 1] so zero-mass cells are never selected
    u = 1.0 - rng.random(n)
    cell = np.clip(np.searchsorted(cdf, u, side="left") - 1, 0, CDF_KNOTS - 1)
    lo = knots[cell]
    hi = knots[cell + 1]
    target = (u - cdf[cell]) * total
    span = cdf[cell + 1] - cdf[cell]
    frac = np.divide(u - cdf[cell], span, out=np.full(n, 0.5), where=span > 0)
    mid = lo + frac * (hi - lo)
    for _ in range(_MAX_BISECTIONS):
        below = _partial_mass(fmap, s, knots[cell], mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.max(hi - lo) <= REFINE_TOL:
            break
        mid = (lo + hi) / 2
    x = np.clip((lo + hi) / 2, 0.0, 1.0)
    return float(x[0]) if size is None else x
