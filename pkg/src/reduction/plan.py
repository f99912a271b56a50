# src/reduction/plan.py
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.errors import ConfigError

DEFAULT_MAX_DENSE_ENTRIES = 2 ** 26
DEFAULT_MAX_PAIRS = 2 ** 22


class ReductionPlan(BaseModel):
    """How the digit wavefunctions are summed and compressed"""

    model_config = ConfigDict(frozen=True)

    chi: int = Field(ge=1, description="Target bond dimension of every compressed state.")
    strategy: Literal["direct", "tree"] = Field(default="tree", description="Direct compression or tree reduction.")
    leaf_batch: Optional[int] = Field(default=None, ge=1,
                                      description="Images summed exactly per leaf; defaults to chi.")
    sweeps: int = Field(default=2, ge=0, description="Variational polish sweeps after each SVD compression.")
    tol: float = Field(default=1e-9, ge=0.0, description="Fidelity gain per sweep below which polishing stops.")
    seed: Optional[int] = Field(default=None, description="Seed for subset draws in overlap estimates.")
    worker_limit: int = Field(default=1, ge=1, description="Maximum number of concurrent reduce tasks.")
    max_dense_entries: int = Field(default=DEFAULT_MAX_DENSE_ENTRIES, ge=1,
                                   description="Cap on tensor entries of the exact sum in direct compression.")

    @property
    def batch(self) -> int:
        return self.leaf_batch or self.chi


def make_plan(**kwargs) -> ReductionPlan:
    """Build a plan, reporting invalid fields as a ConfigError"""
    try:
        return ReductionPlan(**{k: v for k, v in kwargs.items() if v is not None})
    except ValidationError as e:
        raise ConfigError(f"Invalid reduction plan: {e}") from e
