"""Desk-scale MNIST runs; skipped unless MPSR_MNIST_DIR points at the IDX files."""
import os

import numpy as np
import pytest

from src.config import build_config
from src.featuremap import COS_SIN
from src.inference import evaluate_accuracy
from src.init import align_to_models, load_training_set, pretrain
from src.reduction import make_plan, mean_sq_overlap, tree_reduce
from src.storage import load_idx

MNIST_DIR = os.getenv("MPSR_MNIST_DIR")

pytestmark = pytest.mark.skipif(not MNIST_DIR, reason="MPSR_MNIST_DIR is not set")


def _path(*candidates):
    for name in candidates:
        path = os.path.join(MNIST_DIR, name)
        if os.path.exists(path):
            return path
    pytest.skip(f"none of {candidates} found in {MNIST_DIR}")


@pytest.fixture(scope="module")
def train_cfg():
    return build_config(
        map_id="cos-sin", strategy="tree", downscale=2, per_class_limit=500, seed=0,
        train_images=_path("train-images-idx3-ubyte", "train-images-idx3-ubyte.gz"),
        train_labels=_path("train-labels-idx1-ubyte", "train-labels-idx1-ubyte.gz"),
    )


@pytest.fixture(scope="module")
def test_set():
    return load_idx(_path("t10k-images-idx3-ubyte", "t10k-images-idx3-ubyte.gz"),
                    _path("t10k-labels-idx1-ubyte", "t10k-labels-idx1-ubyte.gz"))


class TestDeskScale:
    def test_accuracy_versus_chi(self, train_cfg, test_set):
        train = load_training_set(train_cfg)
        accuracies = []
        for chi in (2, 8, 32):
            models = pretrain(train_cfg, train, chi)
            held_out = align_to_models(test_set, models).head(2000)
            accuracies.append(evaluate_accuracy(models, held_out, train_cfg.worker_limit).accuracy)
        assert accuracies[-1] >= 0.80
        assert all(b >= a - 0.01 for a, b in zip(accuracies, accuracies[1:]))

    def test_overlap_versus_chi(self, train_cfg):
        digit = load_training_set(train_cfg).of_label(3)[:256]
        values = [mean_sq_overlap(tree_reduce(COS_SIN, digit, make_plan(chi=chi)), COS_SIN, digit)
                  for chi in (4, 16, 64, 256)]
        assert values[-1] == pytest.approx(1.0, abs=1e-8)
        assert np.all(np.diff(values) >= -1e-9)
