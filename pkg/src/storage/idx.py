# src/storage/idx.py
"""Reader for big-endian IDX files (MNIST), raw or gzip-compressed."""
import gzip
import hashlib
import logging
import os
import struct
from typing import Tuple

import numpy as np

from src.errors import ConsistencyError, FormatError, StorageError
from src.storage.dataset import Dataset

logger = logging.getLogger(__name__)

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


def _read_bytes(path: str) -> bytes:
    try:
        if path.endswith(".gz"):
            with gzip.open(path, "rb") as f:
                return f.read()
        with open(path, "rb") as f:
            return f.read()
    except (OSError, EOFError) as e:
        raise StorageError(f"cannot read {path}: {e}") from e


def _header(data: bytes, fmt: str, path: str) -> Tuple[int, ...]:
    size = struct.calcsize(fmt)
    if len(data) < size:
        raise FormatError(f"{path}: header truncated ({len(data)} of {size} bytes)", len(data))
    return struct.unpack_from(fmt, data, 0)


def _payload(data: bytes, start: int, count: int, path: str) -> np.ndarray:
    end = start + count
    if len(data) < end:
        raise FormatError(f"{path}: payload truncated, expected {count} bytes after the header", len(data))
    if len(data) > end:
        raise FormatError(f"{path}: {len(data) - end} trailing bytes after the payload", end)
    return np.frombuffer(data, dtype=np.uint8, offset=start, count=count)


def read_idx_images(path: str) -> Tuple[np.ndarray, int, int]:
    """Pixels scaled to [0, 1] as an (n, rows*cols) array, plus rows and cols"""
    data = _read_bytes(path)
    magic, n, rows, cols = _header(data, ">IIII", path)
    if magic != IMAGE_MAGIC:
        raise FormatError(f"{path}: bad image magic 0x{magic:08x}", 0)
    pixels = _payload(data, 16, n * rows * cols, path)
    return pixels.reshape(n, rows * cols) / 255.0, rows, cols


def read_idx_labels(path: str) -> np.ndarray:
    data = _read_bytes(path)
    magic, n = _header(data, ">II", path)
    if magic != LABEL_MAGIC:
        raise FormatError(f"{path}: bad label magic 0x{magic:08x}", 0)
    return _payload(data, 8, n, path).astype(np.int64)


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def load_idx(images_path: str, labels_path: str) -> Dataset:
    """Load an image file and its label file into a raster-ordered Dataset"""
    images, rows, cols = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if len(images) != len(labels):
        raise ConsistencyError(f"{len(images)} images but {len(labels)} labels in {labels_path}")
    provenance = (
        f"images {os.path.basename(images_path)} sha256:{_digest(images_path)}",
        f"labels {os.path.basename(labels_path)} sha256:{_digest(labels_path)}",
    )
    logger.info(f"Loaded {len(images)} images of {rows}x{cols} from {images_path}")
    return Dataset(images, labels, rows, cols, "raster", provenance)


def write_idx(images_path: str, labels_path: str, pixels: np.ndarray, labels) -> None:
    """Write uint8 images of shape (n, rows, cols) and their labels as IDX files"""
    pixels = np.asarray(pixels, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, rows, cols = pixels.shape
    opener = gzip.open if images_path.endswith(".gz") else open
    with opener(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IMAGE_MAGIC, n, rows, cols))
        f.write(pixels.tobytes())
    opener = gzip.open if labels_path.endswith(".gz") else open
    with opener(labels_path, "wb") as f:
        f.write(struct.pack(">II", LABEL_MAGIC, len(labels)))
        f.write(labels.tobytes())
