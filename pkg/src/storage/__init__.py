from src.storage.dataset import Dataset, downscale, from_raster, preprocess, snake_permutation, to_raster
from src.storage.file_storage import METRIC_FIELDS, MetricRecord, ResultStorage, read_curve
from src.storage.idx import load_idx, read_idx_images, read_idx_labels, write_idx
from src.storage.model_file import FORMAT_VERSION, MAGIC, decode_model, encode_model, load_model, save_model

__all__ = [
    "FORMAT_VERSION", "MAGIC", "METRIC_FIELDS", "Dataset", "MetricRecord", "ResultStorage",
    "decode_model", "downscale", "encode_model", "from_raster", "load_idx", "load_model", "preprocess",
    "read_curve", "read_idx_images", "read_idx_labels", "save_model", "snake_permutation", "to_raster",
    "write_idx",
]
