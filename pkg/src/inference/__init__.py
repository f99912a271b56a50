from src.inference.classifier import (
    LOG_FLOOR,
    AccuracyReport,
    classify,
    classify_many,
    evaluate_accuracy,
    log_likelihood,
    log_likelihoods,
    mean_negative_log_likelihood,
    score_matrix,
)
from src.inference.generate import sample_binary, sample_grey
from src.inference.kde import kde_amplitude
from src.inference.models import PIXEL_ORDERS, ClassModel, ModelSet

__all__ = [
    "LOG_FLOOR", "PIXEL_ORDERS", "AccuracyReport", "ClassModel", "ModelSet", "classify",
    "classify_many", "evaluate_accuracy", "kde_amplitude", "log_likelihood", "log_likelihoods",
    "mean_negative_log_likelihood", "sample_binary", "sample_grey", "score_matrix",
]
