# src/inference/classifier.py
"""Likelihood classification with a set of digit wavefunctions."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, TYPE_CHECKING

import numpy as np

from src.errors import DimensionError
from src.inference.models import ClassModel, ModelSet
from src.mps import product_overlaps

if TYPE_CHECKING:
    from src.storage.dataset import Dataset

logger = logging.getLogger(__name__)

# stands in for log(0) so argmax and CSV output stay finite
LOG_FLOOR = -1e9

_CHUNK = 512


def _images(model: ClassModel, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim == 1:
        xs = xs[np.newaxis, :]
    if xs.ndim != 2 or xs.shape[1] != model.n_sites:
        raise DimensionError(f"images of shape {xs.shape} for a {model.n_sites}-site model")
    return xs


def log_likelihoods(model: ClassModel, xs) -> np.ndarray:
    """2 log|<Phi(x_i)|state>| for every row of ``xs``, floored at LOG_FLOOR"""
    log_mag, _ = product_overlaps(model.state, model.fmap, _images(model, xs))
    return np.maximum(2.0 * log_mag, LOG_FLOOR)


def log_likelihood(model: ClassModel, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError(f"expected one image vector, got shape {x.shape}")
    return float(log_likelihoods(model, x)[0])


def score_matrix(models: ModelSet, xs) -> np.ndarray:
    """Log-likelihoods of shape (n_items, n_labels), columns in label order"""
    return np.stack([log_likelihoods(m, xs) for m in models.models], axis=1)


def classify(models: ModelSet, x) -> int:
    """The label of the most likely model; ties go to the smallest label"""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError(f"expected one image vector, got shape {x.shape}")
    return int(classify_many(models, x[np.newaxis, :])[0])


def classify_many(models: ModelSet, xs, worker_limit: int = 1) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    labels = np.asarray(models.labels)
    chunks = [xs[i:i + _CHUNK] for i in range(0, len(xs), _CHUNK)]
    if not chunks:
        return np.empty(0, dtype=np.int64)
    with ThreadPoolExecutor(max_workers=max(1, worker_limit)) as pool:
        scores = list(pool.map(lambda chunk: score_matrix(models, chunk), chunks))
    # np.argmax returns the first maximum, and models are sorted by label
    return labels[np.argmax(np.concatenate(scores, axis=0), axis=1)]


@dataclass(frozen=True)
class AccuracyReport:
    """Test accuracy with confusion counts (rows true label, columns prediction)"""

    accuracy: float
    confusion: np.ndarray
    labels: List[int]
    n_items: int

    def per_class(self) -> Dict[int, float]:
        totals = self.confusion.sum(axis=1)
        return {
            label: float(self.confusion[i, i] / totals[i]) if totals[i] else float("nan")
            for i, label in enumerate(self.labels)
        }


def evaluate_accuracy(models: ModelSet, test: "Dataset", worker_limit: int = 1) -> AccuracyReport:
    """Fraction of test items classified as their true label"""
    truth = np.asarray(test.labels, dtype=np.int64)
    if len(truth) == 0:
        return AccuracyReport(0.0, np.zeros((len(models.labels),) * 2, np.int64), list(models.labels), 0)
    predicted = classify_many(models, test.images, worker_limit)
    labels = sorted(set(models.labels) | set(truth.tolist()))
    index = {label: i for i, label in enumerate(labels)}
    confusion = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(truth, predicted):
        confusion[index[int(t)], index[int(p)]] += 1
    accuracy = float(np.mean(predicted == truth))
    logger.info(f"Accuracy {accuracy:.4f} on {len(truth)} test items")
    return AccuracyReport(accuracy, confusion, labels, len(truth))


def mean_negative_log_likelihood(model: ClassModel, xs) -> float:
    """Average of -2 log|<Phi(x)|state>| over the rows of ``xs``"""
    return float(-np.mean(log_likelihoods(model, xs)))
