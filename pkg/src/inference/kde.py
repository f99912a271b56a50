# src/inference/kde.py
import logging
from typing import Optional

import numpy as np

from src.errors import EmptyInputError
from src.featuremap import LocalFeatureMap
from src.mps import Overlap
from src.reduction import DEFAULT_MAX_PAIRS, log_cnorm, log_sum, pairwise_log_gram

logger = logging.getLogger(__name__)


def kde_amplitude(fmap: LocalFeatureMap, images, x, max_pairs: int = DEFAULT_MAX_PAIRS, subset: bool = False,
                  rng: Optional[np.random.Generator] = None) -> Overlap:
    """
    sum_i <Phi(x)|Phi(x_i)> / C_Norm, term by term.

    This is the amplitude of the normalized uncompressed sum state at ``x``,
    evaluated without building any MPS.
    """
    xs = np.asarray(images, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[0] == 0:
        raise EmptyInputError(f"need a nonempty list of images, got shape {xs.shape}")
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    log_mag, phase = pairwise_log_gram(fmap, x, xs)
    num_mag, num_phase = log_sum(log_mag, phase)
    if num_mag == -np.inf:
        return Overlap(-np.inf, 1 + 0j)
    return Overlap(num_mag - log_cnorm(fmap, xs, max_pairs, subset, rng), num_phase)
