# src/init.py
import logging
import os
import time
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.config import RunConfig
from src.errors import ConfigError, ContractViolation
from src.featuremap import get_feature_map, half_max_width, smooth_delta
from src.inference import (
    AccuracyReport,
    ClassModel,
    ModelSet,
    evaluate_accuracy,
    mean_negative_log_likelihood,
    sample_binary,
    sample_grey,
)
from src.mps import schmidt_spectrum
from src.reduction import DEFAULT_MAX_PAIRS, mean_sq_overlap, reduce_images
from src.storage import Dataset, MetricRecord, ResultStorage, load_idx, load_model, preprocess, save_model, to_raster

logger = logging.getLogger(__name__)


# Set up logging
def setup_logging():
    log_dir = os.getenv("MPSR_LOG_DIR", "logs")
    if not os.path.exists(log_dir):
        os.makedirs(log_dir)

    level = os.getenv("MPSR_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(f"{log_dir}/sumstate.log"),
            logging.StreamHandler()
        ]
    )
    return logging.getLogger("sumstate")


def load_training_set(cfg: RunConfig) -> Dataset:
    """Training images after preprocessing and the optional per-class limit"""
    if not cfg.train_images or not cfg.train_labels:
        raise ConfigError("training image and label paths are required")
    data = preprocess(load_idx(cfg.train_images, cfg.train_labels), cfg.downscale, cfg.binarize, cfg.pixel_order)
    if cfg.per_class_limit:
        data = data.limit_per_class(cfg.per_class_limit)
    return data


def align_to_models(data: Dataset, models: ModelSet) -> Dataset:
    """Preprocess raw data the way the models' training set was"""
    if data.height % models.height or data.width % models.width:
        raise ContractViolation(
            f"{data.height}x{data.width} images cannot be pooled to the models' {models.height}x{models.width}"
        )
    factor = data.height // models.height
    if data.width // models.width != factor:
        raise ContractViolation("models were trained on images with a different aspect ratio")
    notes = models.notes or {}
    binarize = float(notes["binarize"]) if notes.get("binarize") else None
    return preprocess(data, factor, binarize, models.pixel_order)


def pretrain(cfg: RunConfig, data: Optional[Dataset] = None, chi: Optional[int] = None) -> ModelSet:
    """One compressed digit wavefunction per label present in the training set"""
    data = data if data is not None else load_training_set(cfg)
    plan = cfg.plan(chi)
    fmap = get_feature_map(cfg.map_id)
    models: List[ClassModel] = []
    for label in np.unique(data.labels):
        start = time.time()
        images = data.of_label(int(label))
        state = reduce_images(fmap, images, plan)
        models.append(ClassModel.from_reduction(int(label), state, fmap.id, plan.chi, data.pixel_order))
        logger.info(f"Label {label}: {len(images)} images reduced to bond {state.max_bond} "
                    f"in {time.time() - start:.1f}s")
    notes = {
        "downscale": str(cfg.downscale),
        "binarize": "" if cfg.binarize is None else repr(cfg.binarize),
        "image_size_and_order": "desk-scale choice, not taken from a reference run",
    }
    if cfg.per_class_limit:
        notes["per_class_limit"] = str(cfg.per_class_limit)
    return ModelSet(tuple(models), data.height, data.width, plan.strategy, notes)


def run_pretrain(cfg: RunConfig, out_path: str) -> ModelSet:
    models = pretrain(cfg)
    save_model(models, out_path)
    return models


def run_classify(model_path: str, test_images: str, test_labels: str, worker_limit: int = 1,
                 metrics_path: Optional[str] = None, xlsx_path: Optional[str] = None,
                 wall_time_s: float = 0.0) -> AccuracyReport:
    """Accuracy of a saved model set on an IDX test set"""
    start = time.time()
    models = load_model(model_path)
    test = align_to_models(load_idx(test_images, test_labels), models)
    report = evaluate_accuracy(models, test, worker_limit)
    for label, acc in report.per_class().items():
        logger.info(f"Label {label}: accuracy {acc:.4f}")
    record = MetricRecord(chi=models.chi, strategy=models.strategy, map_id=models.map_id,
                          accuracy=report.accuracy, wall_time_s=wall_time_s + time.time() - start)
    if metrics_path:
        ResultStorage("").export_metrics([record], metrics_path)
    if xlsx_path:
        ResultStorage("").export_metrics_xlsx([record], xlsx_path)
    return report


def run_sample(model_path: str, label: int, count: int, mode: str, out_dir: str,
               grey_map: str = "phased", seed: Optional[int] = None) -> List[str]:
    """Draw ``count`` images from one digit wavefunction and write them as PGM/PBM files"""
    models = load_model(model_path)
    model = models.model(label)
    rng = np.random.default_rng(seed)
    storage = ResultStorage(out_dir)
    if mode == "binary":
        images = sample_binary(model, rng, count)
    elif mode == "grey":
        images = sample_grey(model, get_feature_map(grey_map), rng, count)
    else:
        raise ConfigError(f"unknown sampling mode '{mode}'")
    images = to_raster(images, models.height, models.width, models.pixel_order)
    paths = []
    suffix = "pbm" if mode == "binary" else "pgm"
    for i, pixels in enumerate(images):
        paths.append(storage.export_image(pixels, models.height, models.width,
                                          f"sample_{label}_{i:04d}.{suffix}", binary=mode == "binary"))
    logger.info(f"Wrote {len(paths)} {mode} samples of label {label} to {out_dir}")
    return paths


def run_inspect(model_path: str, schmidt_cut: Optional[int] = None, train_images: Optional[str] = None,
                train_labels: Optional[str] = None, subset: Optional[int] = None, estimate: bool = False,
                nll: bool = False, max_pairs: Optional[int] = None, seed: Optional[int] = None,
                overlap: bool = False) -> Dict:
    """Schmidt spectra, overlaps to the exact sums and mean negative log-likelihoods of a model set"""
    models = load_model(model_path)
    result: Dict = {"chi": models.chi, "map_id": models.map_id, "labels": list(models.labels)}
    if schmidt_cut is not None:
        result["schmidt"] = {m.label: schmidt_spectrum(m.state, schmidt_cut) for m in models.models}
    if not (overlap or nll):
        return result
    if not (train_images and train_labels):
        raise ConfigError("overlaps and negative log-likelihoods need the training images and labels")
    data = align_to_models(load_idx(train_images, train_labels), models)
    if subset:
        data = data.limit_per_class(subset)
    rng = np.random.default_rng(seed)
    overlaps = {}
    nlls = {}
    for m in models.models:
        images = data.of_label(m.label)
        if len(images) == 0:
            continue
        if overlap:
            overlaps[m.label] = mean_sq_overlap(m.state, m.fmap, images, max_pairs or DEFAULT_MAX_PAIRS,
                                                subset=estimate, rng=rng)
        if nll:
            nlls[m.label] = mean_negative_log_likelihood(m, images)
    if overlap:
        result["overlap"] = overlaps
    if nll:
        result["nll"] = nlls
    return result


def run_smooth(map_id: str, xi: float, grid: int, out_path: Optional[str] = None) -> Dict[str, float]:
    """The broadened delta of a feature map around ``xi`` on a uniform grid of [0, 1]"""
    fmap = get_feature_map(map_id)
    xs = np.linspace(0.0, 1.0, grid)
    values = smooth_delta(fmap, xi, xs)
    if out_path:
        ResultStorage("").export_curve(xs, values, out_path)
    mags = np.abs(values)
    summary = {"argmax": float(xs[int(np.argmax(mags))]), "half_max_width": half_max_width(xs, mags)}
    logger.info(f"{map_id} at xi={xi}: peak at {summary['argmax']:.4f}, "
                f"half-max width {summary['half_max_width']:.4f}")
    return summary


def run_benchmark(cfg: RunConfig, chis: Sequence[int], metrics_path: str, xlsx_path: Optional[str] = None,
                  with_overlap: bool = False) -> List[MetricRecord]:
    """Pretrain and evaluate once per chi, one metrics row each"""
    if not cfg.test_images or not cfg.test_labels:
        raise ConfigError("test image and label paths are required")
    train = load_training_set(cfg)
    raw_test = load_idx(cfg.test_images, cfg.test_labels)
    records = []
    for chi in chis:
        start = time.time()
        models = pretrain(cfg, train, chi)
        test = align_to_models(raw_test, models)
        report = evaluate_accuracy(models, test, cfg.worker_limit)
        overlap = float("nan")
        if with_overlap:
            rng = np.random.default_rng(cfg.seed)
            overlap = float(np.mean([
                mean_sq_overlap(m.state, m.fmap, train.of_label(m.label), cfg.max_pairs, subset=True, rng=rng)
                for m in models.models
            ]))
        record = MetricRecord(chi=chi, strategy=cfg.strategy, map_id=cfg.map_id, accuracy=report.accuracy,
                              mean_sq_overlap=overlap, wall_time_s=time.time() - start)
        logger.info(f"chi={chi}: accuracy {record.accuracy:.4f}, overlap {record.mean_sq_overlap:.6f}")
        records.append(record)
    storage = ResultStorage(cfg.out_dir)
    storage.export_metrics(records, metrics_path)
    if xlsx_path:
        storage.export_metrics_xlsx(records, xlsx_path)
    return records
