# src/storage/model_file.py
"""
The MPSM model container.

Layout (integers little-endian)::

    b"MPSM" | u16 version | u32 n | n bytes UTF-8 JSON metadata
    | per model: u32 n_sites, per site: u32 x3 extents + complex128 values
    | u32 CRC32 of everything after the version field
"""
import json
import logging
import struct
import zlib
from typing import List, Tuple

import numpy as np

from src.errors import ChecksumError, ConsistencyError, FormatError, StorageError
from src.inference.models import ClassModel, ModelSet
from src.mps import MPS

logger = logging.getLogger(__name__)

MAGIC = b"MPSM"
FORMAT_VERSION = 1
_PREFIX = len(MAGIC) + 2
_META_KEYS = ("map_id", "chi", "pixel_order", "height", "width", "strategy", "models")


def _metadata(models: ModelSet) -> dict:
    return {
        "map_id": models.map_id,
        "chi": int(models.chi),
        "pixel_order": models.pixel_order,
        "height": models.height,
        "width": models.width,
        "strategy": models.strategy,
        "notes": dict(models.notes or {}),
        "models": [
            {
                "label": int(m.label),
                "log_cnorm": float(m.log_cnorm),
                "canonical": m.state.canonical.value,
                "center": m.state.center,
            }
            for m in models.models
        ],
    }


def encode_model(models: ModelSet) -> bytes:
    meta = json.dumps(_metadata(models), sort_keys=True).encode("utf-8")
    parts: List[bytes] = [struct.pack("<I", len(meta)), meta]
    for m in models.models:
        parts.append(struct.pack("<I", m.state.n_sites))
        for site in m.state.sites:
            parts.append(struct.pack("<III", *site.shape))
            parts.append(np.ascontiguousarray(site, dtype="<c16").tobytes())
    payload = b"".join(parts)
    return MAGIC + struct.pack("<H", FORMAT_VERSION) + payload + struct.pack("<I", zlib.crc32(payload))


class _Reader:
    def __init__(self, data: bytes, offset: int):
        self.data = data
        self.offset = offset

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.data):
            raise FormatError(f"model file truncated: need {n} bytes", self.offset)
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt: str) -> Tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def decode_model(data: bytes) -> ModelSet:
    if len(data) < _PREFIX + 4 or data[:len(MAGIC)] != MAGIC:
        raise FormatError("not an MPSM model file", 0)
    (version,) = struct.unpack_from("<H", data, len(MAGIC))
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported model format version {version}, expected {FORMAT_VERSION}", len(MAGIC))
    payload = data[_PREFIX:-4]
    (stored,) = struct.unpack("<I", data[-4:])
    if zlib.crc32(payload) != stored:
        raise ChecksumError("model file checksum mismatch", len(data) - 4)
    reader = _Reader(data[:-4], _PREFIX)
    (meta_len,) = reader.unpack("<I")
    try:
        meta = json.loads(reader.take(meta_len).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"unreadable metadata block: {e}", _PREFIX + 4) from e
    missing = [k for k in _META_KEYS if k not in meta]
    if missing:
        raise FormatError(f"metadata block lacks {missing}", _PREFIX + 4)
    models = []
    for entry in meta["models"]:
        (n_sites,) = reader.unpack("<I")
        sites = []
        for _ in range(n_sites):
            shape = reader.unpack("<III")
            count = shape[0] * shape[1] * shape[2]
            raw = reader.take(16 * count)
            sites.append(np.frombuffer(raw, dtype="<c16").reshape(shape))
        state = MPS(tuple(sites), 0.0, entry["canonical"], entry["center"], meta["map_id"])
        models.append(ClassModel(entry["label"], state, meta["map_id"], entry["log_cnorm"], meta["chi"],
                                 meta["pixel_order"]))
    if reader.offset != len(data) - 4:
        raise ConsistencyError("trailing bytes after the last model", reader.offset)
    return ModelSet(tuple(models), meta["height"], meta["width"], meta["strategy"], meta.get("notes") or None)


def save_model(models: ModelSet, path: str) -> None:
    """Write ``models`` to ``path`` in the MPSM format"""
    data = encode_model(models)
    try:
        with open(path, "wb") as f:
            f.write(data)
    except OSError as e:
        raise StorageError(f"cannot write model file {path}: {e}") from e
    logger.info(f"Saved {len(models.models)} models (chi={models.chi}) to {path}")


def load_model(path: str) -> ModelSet:
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise StorageError(f"cannot read model file {path}: {e}") from e
    models = decode_model(data)
    logger.info(f"Loaded {len(models.models)} models from {path}")
    return models
