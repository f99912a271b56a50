from src.mps.canonical import (
    VariationalFit,
    canonicalize,
    compress_svd,
    compress_svd_profile,
    compress_variational,
    schmidt_spectrum,
)
from src.mps.sampling import sample
from src.mps.state import (
    MPS,
    Canonical,
    Overlap,
    SpinConfig,
    add,
    amplitude,
    amplitude_continuous,
    fidelity,
    inner,
    is_zero_state,
    log_norm,
    product_overlaps,
    product_state,
    sum_product_states,
    to_dense,
)

__all__ = [
    "MPS", "Canonical", "Overlap", "SpinConfig", "VariationalFit", "add", "amplitude",
    "amplitude_continuous", "canonicalize", "compress_svd", "compress_svd_profile",
    "compress_variational", "fidelity",
    "inner", "is_zero_state", "log_norm", "product_overlaps", "product_state", "sample", "schmidt_spectrum",
    "sum_product_states", "to_dense",
]
