from src.featuremap.maps import (
    COS_SIN,
    INDICATOR,
    MEASURE_DENSITY,
    PHASED,
    LocalFeatureMap,
    check_normalization,
    evaluate,
    get_feature_map,
    gram,
    half_max_width,
    sine_basis,
    smooth_delta,
)
from src.featuremap.sampling import conditional_cdf, sample_conditional

__all__ = [
    "COS_SIN", "INDICATOR", "MEASURE_DENSITY", "PHASED", "LocalFeatureMap",
    "check_normalization", "conditional_cdf", "evaluate", "get_feature_map", "gram",
    "half_max_width", "sample_conditional", "sine_basis", "smooth_delta",
]
