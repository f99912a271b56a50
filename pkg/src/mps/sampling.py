# src/mps/sampling.py
import logging
from typing import Optional

import numpy as np

from src.errors import ContractViolation
from src.mps.state import MPS, Canonical, SpinConfig

logger = logging.getLogger(__name__)

NORM_TOL = 1e-8


def sample(m: MPS, rng: np.random.Generator, size: Optional[int] = None) -> SpinConfig:
    """
    Ancestral sampling of configurations from the Born distribution |amplitude(s)|^2.

    ``m`` must be right-canonical with a unit-norm center at site 0, so the
    marginal of each site given its left neighbours only needs the left
    environment. All ``size`` draws advance together, one site at a time.
    Returns one configuration, or a ``(size, N)`` integer array.
    """
    if m.canonical != Canonical.RIGHT:
        raise ContractViolation(f"sampling needs a right-canonical state, got {m.canonical.value}")
    norm = float(np.linalg.norm(m.sites[0]))
    if abs(norm - 1.0) > NORM_TOL:
        raise ContractViolation(f"sampling needs a unit-norm state, center norm is {norm}")
    n = 1 if size is None else int(size)
    configs = np.empty((n, m.n_sites), dtype=np.int64)
    env = np.ones((n, 1), np.complex128)
    rows = np.arange(n)
    for k, site in enumerate(m.sites):
        branch = np.einsum("na,asb->nsb", env, site)
        weights = np.sum(np.abs(branch) ** 2, axis=2)
        probs = weights / np.sum(weights, axis=1, keepdims=True)
        cum = np.cumsum(probs, axis=1)
        # u in (0, 1] so zero-probability outcomes are never chosen
        u = 1.0 - rng.random(n)
        choice = np.sum(cum[:, :-1] < u[:, np.newaxis], axis=1)
        # rounding in cum must not land on a trailing zero-weight outcome
        last_live = weights.shape[1] - 1 - np.argmax(weights[:, ::-1] > 0, axis=1)
        choice = np.minimum(choice, last_live)
        configs[:, k] = choice
        chosen = branch[rows, choice, :]
        env = chosen / np.sqrt(weights[rows, choice])[:, np.newaxis]
    return configs[0] if size is None else configs
