# src/inference/generate.py
"""Binary and grey-scale image generation from a digit wavefunction."""
import logging
from typing import Optional

import numpy as np

from src.errors import ContractViolation, DimensionError
from src.featuremap import LocalFeatureMap, sample_conditional
from src.inference.models import ClassModel
from src.mps import Canonical, SpinConfig, canonicalize, sample

logger = logging.getLogger(__name__)


def sample_binary(model: ClassModel, rng: np.random.Generator, size: Optional[int] = None) -> SpinConfig:
    """Ancestral samples of the discrete components, read as 0/1 images when d = 2"""
    state = model.state
    if state.canonical != Canonical.RIGHT:
        state = canonicalize(state, Canonical.RIGHT).direction()
    return sample(state, rng, size)


def sample_grey(model: ClassModel, ortho_map: LocalFeatureMap, rng: np.random.Generator,
                size: Optional[int] = None) -> np.ndarray:
    """
    Two-stage sampling: components s from the state, then each pixel from
    |phi^{s_k}(x)|^2 w(x) of ``ortho_map``, independently per site.
    """
    if not ortho_map.claims_orthonormal:
        raise ContractViolation(f"grey sampling needs an orthonormal map, {ortho_map.id} is not")
    if any(d != ortho_map.d for d in model.state.phys_dims):
        raise DimensionError(f"map {ortho_map.id} has d={ortho_map.d}, model has {model.state.phys_dims[0]}")
    configs = sample_binary(model, rng, size)
    pixels = np.empty(configs.shape, dtype=np.float64)
    for v in range(ortho_map.d):
        mask = configs == v
        count = int(np.count_nonzero(mask))
        if count:
            pixels[mask] = sample_conditional(ortho_map, v, rng, size=count)
    return pixels
