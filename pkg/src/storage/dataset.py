# src/storage/dataset.py
import logging
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from src.errors import ConsistencyError, ContractViolation, DimensionError, DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Images as rows of pixel values in [0, 1], with labels and layout"""

    images: np.ndarray
    labels: np.ndarray
    height: int
    width: int
    pixel_order: str = "raster"
    provenance: Tuple[str, ...] = ()

    def __post_init__(self):
        images = np.array(self.images, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        if images.ndim != 2 or images.shape[1] != self.height * self.width:
            raise DimensionError(f"images of shape {images.shape} for {self.height}x{self.width} pixels")
        if len(images) != len(labels):
            raise ConsistencyError(f"{len(images)} images but {len(labels)} labels")
        if images.size and (images.min() < 0.0 or images.max() > 1.0):
            raise DomainError("pixel values must lie in [0, 1]")
        if self.pixel_order not in ("raster", "snake"):
            raise ContractViolation(f"unknown pixel order '{self.pixel_order}'")
        images.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "provenance", tuple(self.provenance))

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_pixels(self) -> int:
        return self.height * self.width

    def select(self, mask, note: Optional[str] = None) -> "Dataset":
        """Rows picked by a boolean mask or an index array, in their original order"""
        idx = np.flatnonzero(mask) if np.asarray(mask).dtype == bool else np.asarray(mask, dtype=np.int64)
        provenance = self.provenance + ((note,) if note else ())
        return replace(self, images=self.images[idx], labels=self.labels[idx], provenance=provenance)

    def of_label(self, label: int) -> np.ndarray:
        return self.images[self.labels == label]

    def limit_per_class(self, limit: int) -> "Dataset":
        """Keep the first ``limit`` images of every label"""
        keep = np.zeros(len(self), dtype=bool)
        for label in np.unique(self.labels):
            keep[np.flatnonzero(self.labels == label)[:limit]] = True
        return self.select(keep, f"first {limit} per class")

    def head(self, n: int) -> "Dataset":
        return self.select(np.arange(min(n, len(self))), f"first {n}")


def snake_permutation(height: int, width: int) -> np.ndarray:
    """Raster index of every snake position; odd rows run right to left"""
    grid = np.arange(height * width).reshape(height, width)
    grid[1::2] = grid[1::2, ::-1]
    return grid.reshape(-1)


def to_raster(images: np.ndarray, height: int, width: int, pixel_order: str) -> np.ndarray:
    if pixel_order == "raster":
        return images
    # the snake permutation is an involution
    return images[..., snake_permutation(height, width)]


def from_raster(images: np.ndarray, height: int, width: int, pixel_order: str) -> np.ndarray:
    return to_raster(images, height, width, pixel_order)


def downscale(images: np.ndarray, height: int, width: int, factor: int) -> np.ndarray:
    """Mean-pool raster images over factor x factor blocks"""
    if factor < 1 or height % factor or width % factor:
        raise DomainError(f"downscale factor {factor} must divide {height}x{width}")
    if factor == 1:
        return images
    n = len(images)
    blocks = images.reshape(n, height // factor, factor, width // factor, factor)
    return blocks.mean(axis=(2, 4)).reshape(n, -1)


def preprocess(d: Dataset, factor: int = 1, binarize: Optional[float] = None,
               pixel_order: str = "raster") -> Dataset:
    """
    Optional mean-pool downscale, optional binarization at a threshold, then
    reordering to ``pixel_order``. Every step is appended to the provenance.
    """
    if pixel_order not in ("raster", "snake"):
        raise ContractViolation(f"unknown pixel order '{pixel_order}'")
    images = to_raster(d.images, d.height, d.width, d.pixel_order)
    steps = []
    images = downscale(images, d.height, d.width, factor)
    height, width = d.height // factor, d.width // factor
    if factor != 1:
        steps.append(f"downscale x{factor} -> {height}x{width}")
    if binarize is not None:
        images = (images >= binarize).astype(np.float64)
        steps.append(f"binarize at {binarize}")
    images = from_raster(images, height, width, pixel_order)
    if pixel_order != "raster":
        steps.append(f"order {pixel_order}")
    logger.debug(f"preprocess: {', '.join(steps) or 'identity'}")
    return Dataset(images, d.labels, height, width, pixel_order, d.provenance + tuple(steps))
