# src/inference/models.py
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

from src.errors import ConsistencyError, ContractViolation, DimensionError
from src.featuremap import LocalFeatureMap, get_feature_map
from src.mps import MPS, Canonical, canonicalize, log_norm

logger = logging.getLogger(__name__)

PIXEL_ORDERS = ("raster", "snake")
UNIT_NORM_TOL = 1e-10


@dataclass(frozen=True)
class ClassModel:
    """The compressed digit wavefunction of one label"""

    label: int
    state: MPS
    map_id: str
    log_cnorm: float
    chi: int
    pixel_order: str = "raster"

    def __post_init__(self):
        if self.pixel_order not in PIXEL_ORDERS:
            raise ContractViolation(f"unknown pixel order '{self.pixel_order}'")
        fmap = get_feature_map(self.map_id)
        if any(d != fmap.d for d in self.state.phys_dims):
            raise DimensionError(f"model {self.label}: state dims {self.state.phys_dims[0]} != map d={fmap.d}")
        if self.state.max_bond > self.chi:
            raise ContractViolation(f"model {self.label}: bond {self.state.max_bond} exceeds chi={self.chi}")
        norm_gap = abs(log_norm(self.state))
        if not norm_gap <= UNIT_NORM_TOL:
            raise ContractViolation(f"model {self.label}: state is not unit-norm (log norm {norm_gap:.3e})")

    @property
    def fmap(self) -> LocalFeatureMap:
        return get_feature_map(self.map_id)

    @property
    def n_sites(self) -> int:
        return self.state.n_sites

    @classmethod
    def from_reduction(cls, label: int, state: MPS, map_id: str, chi: int, pixel_order: str = "raster") -> "ClassModel":
        """Split a reduced sum into its unit-norm right-canonical direction and ln C_Norm"""
        c = canonicalize(state, Canonical.RIGHT)
        return cls(int(label), c.direction(), map_id, c.log_scale, int(chi), pixel_order)


@dataclass(frozen=True)
class ModelSet:
    """One ClassModel per label, sharing map, chi, pixel order and image shape"""

    models: Tuple[ClassModel, ...]
    height: int
    width: int
    strategy: str = "tree"
    notes: Optional[Dict[str, str]] = None

    def __post_init__(self):
        if not self.models:
            raise ConsistencyError("a model set needs at least one model")
        models = tuple(sorted(self.models, key=lambda m: m.label))
        labels = [m.label for m in models]
        if len(set(labels)) != len(labels):
            raise ConsistencyError(f"duplicate labels in model set: {labels}")
        first = models[0]
        for m in models[1:]:
            if (m.map_id, m.chi, m.pixel_order, m.n_sites) != (first.map_id, first.chi, first.pixel_order,
                                                               first.n_sites):
                raise ConsistencyError(f"model {m.label} metadata differs from model {first.label}")
        if first.n_sites != self.height * self.width:
            raise ConsistencyError(f"{first.n_sites} sites do not match a {self.height}x{self.width} image")
        object.__setattr__(self, "models", models)

    @property
    def labels(self) -> Sequence[int]:
        return [m.label for m in self.models]

    @property
    def map_id(self) -> str:
        return self.models[0].map_id

    @property
    def chi(self) -> int:
        return self.models[0].chi

    @property
    def pixel_order(self) -> str:
        return self.models[0].pixel_order

    @property
    def n_sites(self) -> int:
        return self.models[0].n_sites

    def model(self, label: int) -> ClassModel:
        for m in self.models:
            if m.label == label:
                return m
        raise ContractViolation(f"no model for label {label}; available {list(self.labels)}")
