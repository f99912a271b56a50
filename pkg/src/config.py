# src/config.py
import logging
import os
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.errors import ConfigError
from src.reduction.plan import DEFAULT_MAX_DENSE_ENTRIES, DEFAULT_MAX_PAIRS, ReductionPlan, make_plan

logger = logging.getLogger(__name__)


def _env_int(name: str, default: Optional[int]) -> Optional[int]:
    value = os.getenv(name)
    if value is None or value == "":
        return default
    try:
        return int(value)
    except ValueError as e:
        raise ConfigError(f"environment variable {name} must be an integer, got '{value}'") from e


def env_workers(default: int = 1) -> int:
    """MPSR_WORKERS, which takes precedence over the --workers flag"""
    return _env_int("MPSR_WORKERS", default)


class RunConfig(BaseModel):
    """Every knob of a pretraining run"""

    model_config = ConfigDict(frozen=True)

    map_id: str = Field(default="cos-sin", description="Local feature map id.")
    chi: int = Field(default=16, ge=1, description="Target bond dimension.")
    strategy: Literal["direct", "tree"] = Field(default="tree", description="Reduction strategy.")
    leaf_batch: Optional[int] = Field(default=None, ge=1, description="Images per exact leaf (default chi).")
    sweeps: int = Field(default=2, ge=0, description="Variational polish sweeps.")
    tol: float = Field(default=1e-9, ge=0.0, description="Sweep convergence tolerance.")
    downscale: int = Field(default=2, ge=1, description="Mean-pooling factor applied to both image axes.")
    binarize: Optional[float] = Field(default=None, ge=0.0, le=1.0, description="Binarization threshold.")
    pixel_order: Literal["raster", "snake"] = Field(default="raster", description="Pixel ordering along the chain.")
    seed: Optional[int] = Field(default=None, description="Seed for every random draw of the run.")
    worker_limit: int = Field(default=1, ge=1, description="Maximum concurrent reduce tasks.")
    per_class_limit: Optional[int] = Field(default=None, ge=1, description="Keep the first M images of each label.")
    train_images: Optional[str] = Field(default=None, description="IDX image file for training.")
    train_labels: Optional[str] = Field(default=None, description="IDX label file for training.")
    test_images: Optional[str] = Field(default=None, description="IDX image file for testing.")
    test_labels: Optional[str] = Field(default=None, description="IDX label file for testing.")
    out_dir: str = Field(default=".", description="Directory for every output file.")
    max_dense_entries: int = Field(default=DEFAULT_MAX_DENSE_ENTRIES, ge=1,
                                   description="Memory cap of direct compression in tensor entries.")
    max_pairs: int = Field(default=DEFAULT_MAX_PAIRS, ge=1, description="Cap on pairwise overlap terms.")

    def plan(self, chi: Optional[int] = None) -> ReductionPlan:
        return make_plan(chi=chi or self.chi, strategy=self.strategy, leaf_batch=self.leaf_batch,
                         sweeps=self.sweeps, tol=self.tol, seed=self.seed, worker_limit=self.worker_limit,
                         max_dense_entries=self.max_dense_entries)


def build_config(**kwargs) -> RunConfig:
    """
    RunConfig from explicit values, with the MPSR_* environment filling the
    caps and MPSR_WORKERS overriding the worker count.
    """
    values = {k: v for k, v in kwargs.items() if v is not None}
    values["worker_limit"] = env_workers(values.get("worker_limit", 1))
    values.setdefault("max_dense_entries", _env_int("MPSR_MAX_DENSE_ENTRIES", DEFAULT_MAX_DENSE_ENTRIES))
    values.setdefault("max_pairs", _env_int("MPSR_MAX_PAIRS", DEFAULT_MAX_PAIRS))
    try:
        return RunConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"Invalid run configuration: {e}") from e
