# src/storage/file_storage.py
import csv
import logging
import math
import os
from typing import Iterable, List, Sequence

import numpy as np
from pydantic import BaseModel, Field

from src.errors import DimensionError, StorageError

logger = logging.getLogger(__name__)

METRIC_FIELDS = ["chi", "strategy", "map_id", "accuracy", "mean_sq_overlap", "wall_time_s"]
CURVE_FIELDS = ["x", "re", "im", "abs"]


class MetricRecord(BaseModel):
    """One row of the accuracy / overlap versus chi series"""

    chi: int = Field(ge=1, description="Bond dimension of the models.")
    strategy: str = Field(description="Reduction strategy, direct or tree.")
    map_id: str = Field(description="Local feature map used for the encoding.")
    accuracy: float = Field(ge=0.0, le=1.0, description="Test accuracy.")
    mean_sq_overlap: float = Field(default=float("nan"),
                                   description="Mean over labels of the squared overlap to the exact sum.")
    wall_time_s: float = Field(ge=0.0, description="Wall time of pretraining and evaluation in seconds.")


class ResultStorage:
    """Class to write metrics, curves and images under an output directory"""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir

        # Create the output directory if it doesn't exist
        if self.out_dir and not os.path.exists(self.out_dir):
            os.makedirs(self.out_dir)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name) if self.out_dir else name

    def export_metrics(self, records: Iterable[MetricRecord], name: str) -> str:
        """Write metric records to a CSV file with a header row"""
        path = self.path(name)
        rows = [r.model_dump() for r in records]
        try:
            with open(path, "w", newline="", encoding="utf-8") as f:
                writer = csv.DictWriter(f, fieldnames=METRIC_FIELDS)
                writer.writeheader()
                writer.writerows(rows)
        except OSError as e:
            raise StorageError(f"cannot write metrics to {path}: {e}") from e
        logger.info(f"Metrics ({len(rows)} rows) saved to {path}")
        return path

    def export_metrics_xlsx(self, records: Iterable[MetricRecord], name: str) -> str:
        """Same columns as the CSV, in a one-sheet workbook"""
        from openpyxl import Workbook  # lazy import

        path = self.path(name)
        wb = Workbook()
        ws = wb.active
        ws.title = "Metrics"
        ws.append(METRIC_FIELDS)
        for r in records:
            row = r.model_dump()
            # empty cell for a missing overlap
            ws.append([None if isinstance(row[k], float) and math.isnan(row[k]) else row[k] for k in METRIC_FIELDS])
        try:
            wb.save(path)
        except OSError as e:
            raise StorageError(f"cannot write workbook {path}: {e}") from e
        logger.info(f"Metrics workbook saved to {path}")
        return path

    def export_curve(self, xs: Sequence[float], values: Sequence[complex], name: str) -> str:
        """A complex function sampled on a grid, one row per point"""
        path = self.path(name)
        values = np.asarray(values, dtype=np.complex128)
        if len(xs) != len(values):
            raise DimensionError(f"{len(xs)} grid points but {len(values)} values")
        try:
            with open(path, "w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f)
                writer.writerow(CURVE_FIELDS)
                for x, v in zip(xs, values):
                    writer.writerow([repr(float(x)), repr(float(v.real)), repr(float(v.imag)), repr(float(abs(v)))])
        except OSError as e:
            raise StorageError(f"cannot write curve to {path}: {e}") from e
        logger.info(f"Curve of {len(values)} points saved to {path}")
        return path

    def export_image(self, pixels, height: int, width: int, name: str, binary: bool = False) -> str:
        """
        Write an image as a binary PGM (P5, values in [0, 1] quantized to 8 bits)
        or, with ``binary``, as a plain PBM (P1, 1 = black).
        """
        path = self.path(name)
        pixels = np.asarray(pixels, dtype=np.float64).reshape(-1)
        if pixels.size != height * width:
            raise DimensionError(f"{pixels.size} pixels for a {height}x{width} image")
        if binary:
            rows = pixels.reshape(height, width).astype(np.int64)
            body = "\n".join(" ".join(str(v) for v in row) for row in rows) + "\n"
            data = f"P1\n{width} {height}\n".encode("ascii") + body.encode("ascii")
        else:
            levels = np.rint(np.clip(pixels, 0.0, 1.0) * 255).astype(np.uint8)
            data = f"P5\n{width} {height}\n255\n".encode("ascii") + levels.tobytes()
        try:
            with open(path, "wb") as f:
                f.write(data)
        except OSError as e:
            raise StorageError(f"cannot write image {path}: {e}") from e
        return path


def read_curve(path: str) -> List[List[float]]:
    """Rows of a curve CSV as floats, header skipped"""
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    return [[float(v) for v in row] for row in rows[1:]]
