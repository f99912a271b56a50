import csv
import struct

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.errors import ChecksumError, ConsistencyError, DomainError, FormatError, StorageError
from src.inference import ClassModel, ModelSet, evaluate_accuracy
from src.storage import (
    Dataset,
    MetricRecord,
    ResultStorage,
    decode_model,
    encode_model,
    load_idx,
    load_model,
    preprocess,
    read_curve,
    save_model,
    snake_permutation,
    write_idx,
)
from tests.oracles import random_images, random_unit_mps

FIXTURE_BYTES = np.array([[[0, 255], [128, 64]], [[1, 2], [3, 254]]], dtype=np.uint8)


@pytest.fixture
def idx_pair(tmp_path):
    images = str(tmp_path / "images-idx3-ubyte")
    labels = str(tmp_path / "labels-idx1-ubyte")
    write_idx(images, labels, FIXTURE_BYTES, [3, 7])
    return images, labels


@pytest.fixture
def model_set(rng):
    models = tuple(
        ClassModel(label, random_unit_mps(rng, 6, chi=3, map_id="phased"), "phased", float(label) + 0.25, 3)
        for label in (0, 1, 2)
    )
    return ModelSet(models, 2, 3, "tree", {"downscale": "1"})


class TestIdx:
    def test_scaling(self, idx_pair):
        data = load_idx(*idx_pair)
        assert (data.height, data.width, len(data)) == (2, 2, 2)
        assert_allclose(data.images[0], [0.0, 1.0, 128 / 255, 64 / 255])
        assert list(data.labels) == [3, 7]
        assert len(data.provenance) == 2 and "sha256:" in data.provenance[0]

    def test_lossless_for_fixture_bytes(self, idx_pair):
        data = load_idx(*idx_pair)
        assert np.array_equal(np.rint(data.images * 255).astype(np.uint8), FIXTURE_BYTES.reshape(2, 4))

    def test_gzip(self, tmp_path):
        images = str(tmp_path / "images.gz")
        labels = str(tmp_path / "labels.gz")
        write_idx(images, labels, FIXTURE_BYTES, [3, 7])
        assert_allclose(load_idx(images, labels).images[1], np.array([1, 2, 3, 254]) / 255)

    def test_truncated(self, idx_pair):
        images, labels = idx_pair
        with open(images, "rb") as f:
            data = f.read()
        with open(images, "wb") as f:
            f.write(data[:-3])
        with pytest.raises(FormatError) as err:
            load_idx(images, labels)
        assert err.value.offset is not None

    def test_bad_magic(self, idx_pair):
        images, labels = idx_pair
        with open(images, "r+b") as f:
            f.write(struct.pack(">I", 0x0801))
        with pytest.raises(FormatError) as err:
            load_idx(images, labels)
        assert err.value.offset == 0

    def test_count_mismatch(self, tmp_path, idx_pair):
        images, _ = idx_pair
        other = str(tmp_path / "three-labels")
        write_idx(str(tmp_path / "unused"), other, np.zeros((3, 2, 2)), [1, 2, 3])
        with pytest.raises(ConsistencyError):
            load_idx(images, other)

    def test_missing_file(self, tmp_path):
        with pytest.raises(StorageError):
            load_idx(str(tmp_path / "nope"), str(tmp_path / "nope"))


class TestPreprocess:
    def test_identity(self, rng):
        d = Dataset(random_images(rng, 3, 6), [0, 1, 2], 2, 3)
        out = preprocess(d)
        assert_allclose(out.images, d.images)
        assert out.provenance == d.provenance

    def test_constant_image(self):
        d = Dataset(np.ones((1, 28 * 28)), [0], 28, 28)
        out = preprocess(d, 2)
        assert (out.height, out.width) == (14, 14)
        assert_allclose(out.images, 1.0)

    def test_block_mean(self):
        out = preprocess(Dataset([[0.0, 1.0, 1.0, 1.0]], [0], 2, 2), 2)
        assert_allclose(out.images, [[0.75]])

    def test_non_divisor(self):
        with pytest.raises(DomainError):
            preprocess(Dataset(np.zeros((1, 9)), [0], 3, 3), 2)

    def test_binarize(self):
        out = preprocess(Dataset([[0.2, 0.5, 0.7, 0.1]], [0], 2, 2), binarize=0.5)
        assert_allclose(out.images, [[0, 1, 1, 0]])
        assert out.provenance[-1] == "binarize at 0.5"

    def test_snake_order(self):
        images = np.arange(6)[np.newaxis, :] / 10
        out = preprocess(Dataset(images, [0], 2, 3), pixel_order="snake")
        assert_allclose(out.images[0] * 10, [0, 1, 2, 5, 4, 3])
        back = preprocess(out, pixel_order="raster")
        assert_allclose(back.images, images)

    def test_snake_permutation_is_involution(self):
        p = snake_permutation(4, 5)
        assert np.array_equal(p[p], np.arange(20))

    def test_rejects_out_of_range_pixels(self):
        with pytest.raises(DomainError):
            Dataset([[0.0, 1.5]], [0], 1, 2)

    def test_limit_per_class(self):
        d = Dataset(np.zeros((6, 1)), [1, 0, 1, 1, 0, 0], 1, 1).limit_per_class(2)
        assert list(d.labels) == [1, 0, 1, 0]


class TestModelFile:
    def test_round_trip_is_bit_exact(self, model_set, tmp_path):
        path = str(tmp_path / "model.mpsm")
        save_model(model_set, path)
        loaded = load_model(path)
        assert encode_model(loaded) == encode_model(model_set)
        assert list(loaded.labels) == [0, 1, 2]
        assert loaded.models[2].log_cnorm == 2.25
        assert (loaded.height, loaded.width, loaded.strategy) == (2, 3, "tree")
        assert loaded.notes == {"downscale": "1"}
        for a, b in zip(loaded.models, model_set.models):
            assert all(np.array_equal(x, y) for x, y in zip(a.state.sites, b.state.sites))

    def test_header(self, model_set):
        data = encode_model(model_set)
        assert data[:4] == b"MPSM"
        assert struct.unpack("<H", data[4:6]) == (1,)

    def test_corrupted_byte(self, model_set):
        data = bytearray(encode_model(model_set))
        data[len(data) // 2] ^= 0xFF
        with pytest.raises(ChecksumError):
            decode_model(bytes(data))

    def test_version_mismatch(self, model_set):
        data = bytearray(encode_model(model_set))
        data[4:6] = struct.pack("<H", 2)
        with pytest.raises(FormatError, match="version"):
            decode_model(bytes(data))

    def test_bad_magic(self, model_set):
        with pytest.raises(FormatError):
            decode_model(b"XXXX" + encode_model(model_set)[4:])

    def test_loaded_model_classifies_identically(self, model_set, rng, tmp_path):
        path = str(tmp_path / "model.mpsm")
        save_model(model_set, path)
        test = Dataset(random_images(rng, 40, 6), rng.integers(0, 3, 40), 2, 3)
        a = evaluate_accuracy(model_set, test)
        b = evaluate_accuracy(load_model(path), test)
        assert a.accuracy == b.accuracy
        assert np.array_equal(a.confusion, b.confusion)


class TestExports:
    def test_one_record(self, tmp_path):
        storage = ResultStorage(str(tmp_path / "out"))
        record = MetricRecord(chi=8, strategy="tree", map_id="cos-sin", accuracy=0.9, mean_sq_overlap=0.5,
                              wall_time_s=1.5)
        path = storage.export_metrics([record], "metrics.csv")
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
        assert len(lines) == 2
        assert lines[0] == "chi,strategy,map_id,accuracy,mean_sq_overlap,wall_time_s"
        assert lines[1].startswith("8,tree,cos-sin,0.9")

    def test_xlsx(self, tmp_path):
        openpyxl = pytest.importorskip("openpyxl")
        record = MetricRecord(chi=4, strategy="direct", map_id="phased", accuracy=1.0, wall_time_s=0.0)
        path = ResultStorage(str(tmp_path)).export_metrics_xlsx([record], "metrics.xlsx")
        rows = list(openpyxl.load_workbook(path).active.values)
        assert rows[0][0] == "chi" and rows[1][:3] == (4, "direct", "phased")

    def test_grey_image(self, tmp_path):
        path = ResultStorage(str(tmp_path)).export_image(np.zeros(4), 2, 2, "zero.pgm")
        with open(path, "rb") as f:
            data = f.read()
        assert data.startswith(b"P5\n2 2\n255\n")
        assert data[-4:] == bytes([0, 0, 0, 0])

    def test_binary_image(self, tmp_path):
        path = ResultStorage(str(tmp_path)).export_image([1, 0, 0, 1], 2, 2, "eye.pbm", binary=True)
        with open(path, encoding="ascii") as f:
            assert f.read() == "P1\n2 2\n1 0\n0 1\n"

    def test_curve_round_trip(self, tmp_path):
        xs = np.linspace(0, 1, 7)
        values = np.exp(1j * xs) * (1 + xs)
        path = ResultStorage(str(tmp_path)).export_curve(xs, values, "curve.csv")
        rows = np.array(read_curve(path))
        assert_allclose(rows[:, 1] + 1j * rows[:, 2], values, rtol=1e-6)
        assert_allclose(rows[:, 3], np.abs(values), rtol=1e-6)
        with open(path, newline="", encoding="utf-8") as f:
            assert next(csv.reader(f)) == ["x", "re", "im", "abs"]
