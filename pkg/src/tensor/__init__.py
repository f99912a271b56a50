from src.tensor.core import (
    RANK_EPS,
    DenseTensor,
    as_tensor,
    contract,
    lq,
    qr,
    svd,
    truncate,
)

__all__ = ["RANK_EPS", "DenseTensor", "as_tensor", "contract", "lq", "qr", "svd", "truncate"]
