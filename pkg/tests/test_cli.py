import csv
import os

import numpy as np
import pytest

from src.cli.app import build_parser, main
from src.storage import write_idx


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    """Two separable classes of 4x4 images: bright left half or bright right half"""
    monkeypatch.setenv("MPSR_LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.delenv("MPSR_WORKERS", raising=False)
    monkeypatch.delenv("MPSR_MAX_DENSE_ENTRIES", raising=False)
    rng = np.random.default_rng(5)
    labels = np.repeat([0, 1], 12)
    images = np.zeros((24, 4, 4))
    images[:12, :, :2] = 1
    images[12:, :, 2:] = 1
    noisy = np.abs(images - 0.15 * rng.random(images.shape))
    write_idx(str(tmp_path / "images"), str(tmp_path / "labels"), np.rint(noisy * 255), labels)
    return tmp_path


def train_args(ws, *extra):
    return ["--train-images", str(ws / "images"), "--train-labels", str(ws / "labels"), "--downscale", "1",
            *extra]


def pretrain(ws, *extra):
    out = str(ws / "model.mpsm")
    assert main(["pretrain", *train_args(ws, "--chi", "4", *extra), "--out", out]) == 0
    return out


class TestParser:
    def test_subcommands(self):
        args = build_parser().parse_args(["smooth", "--map", "sin-40", "--xi", "0.25"])
        assert (args.command, args.map_id, args.xi, args.grid) == ("smooth", "sin-40", 0.25, 1000)

    def test_strategy_choices(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["pretrain", "--train-images", "a", "--train-labels", "b", "--out", "c",
                                       "--strategy", "fan"])


class TestWorkflows:
    def test_pretrain_and_classify(self, workspace, capsys):
        model = pretrain(workspace)
        metrics = str(workspace / "metrics.csv")
        code = main(["classify", "--model", model, "--test-images", str(workspace / "images"),
                     "--test-labels", str(workspace / "labels"), "--metrics", metrics])
        assert code == 0
        out = capsys.readouterr().out
        accuracy = float(out.split("accuracy ")[1].split()[0])
        assert accuracy >= 0.9
        with open(metrics, newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 1 and rows[0]["chi"] == "4" and rows[0]["strategy"] == "tree"

    def test_worker_count_does_not_change_the_model(self, workspace, monkeypatch):
        with open(pretrain(workspace, "--seed", "3"), "rb") as f:
            single = f.read()
        monkeypatch.setenv("MPSR_WORKERS", "4")
        with open(pretrain(workspace, "--seed", "3"), "rb") as f:
            parallel = f.read()
        assert single == parallel

    def test_sample(self, workspace):
        model = pretrain(workspace)
        outdir = workspace / "samples"
        assert main(["sample", "--model", model, "--label", "1", "--count", "3", "--seed", "1",
                     "--outdir", str(outdir)]) == 0
        assert sorted(os.listdir(outdir)) == [f"sample_1_000{i}.pbm" for i in range(3)]
        assert main(["sample", "--model", model, "--label", "0", "--count", "2", "--mode", "grey",
                     "--outdir", str(outdir)]) == 0
        with open(outdir / "sample_0_0000.pgm", "rb") as f:
            assert f.read().startswith(b"P5\n4 4\n255\n")

    def test_inspect(self, workspace, capsys):
        model = pretrain(workspace, "--chi", "16")
        code = main(["inspect", "--model", model, "--schmidt", "8", "--overlap", "--nll",
                     *train_args(workspace)[:4]])
        assert code == 0
        out = capsys.readouterr().out
        assert "label 0 schmidt" in out and "label 1 nll" in out
        overlap = float(out.split("label 0 mean_sq_overlap: ")[1].split()[0])
        assert overlap == pytest.approx(1.0, abs=1e-8)

    def test_inspect_nll_skips_overlap(self, workspace, monkeypatch, capsys):
        model = pretrain(workspace)
        monkeypatch.setenv("MPSR_MAX_PAIRS", "10")
        assert main(["inspect", "--model", model, "--nll", *train_args(workspace)[:4]]) == 0
        out = capsys.readouterr().out
        assert "label 0 nll" in out and "mean_sq_overlap" not in out

    def test_smooth(self, workspace, capsys):
        out_path = str(workspace / "curve.csv")
        assert main(["smooth", "--map", "sin-40", "--out", out_path]) == 0
        argmax = float(capsys.readouterr().out.split()[1])
        assert abs(argmax - 0.5) <= 0.0125
        with open(out_path, encoding="utf-8") as f:
            assert len(f.read().splitlines()) == 1001

    def test_benchmark(self, workspace):
        metrics = "bench.csv"
        code = main(["benchmark", *train_args(workspace), "--test-images", str(workspace / "images"),
                     "--test-labels", str(workspace / "labels"), "--chis", "1", "4", "--with-overlap",
                     "--outdir", str(workspace), "--metrics", metrics])
        assert code == 0
        with open(workspace / metrics, newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        assert [r["chi"] for r in rows] == ["1", "4"]
        assert all(0.0 < float(r["mean_sq_overlap"]) <= 1.0 + 1e-9 for r in rows)


class TestExitCodes:
    def test_format_error(self, workspace):
        bad = workspace / "bad.mpsm"
        bad.write_bytes(b"not a model")
        code = main(["classify", "--model", str(bad), "--test-images", str(workspace / "images"),
                     "--test-labels", str(workspace / "labels")])
        assert code == 2

    def test_capacity_error(self, workspace, monkeypatch):
        monkeypatch.setenv("MPSR_MAX_DENSE_ENTRIES", "10")
        code = main(["pretrain", *train_args(workspace, "--strategy", "direct"), "--out",
                     str(workspace / "m.mpsm")])
        assert code == 3

    def test_contract_violation(self, workspace):
        model = pretrain(workspace)
        code = main(["sample", "--model", model, "--label", "0", "--mode", "grey", "--grey-map", "cos-sin",
                     "--outdir", str(workspace / "s")])
        assert code == 4

    def test_inspect_overlap_needs_data(self, workspace):
        assert main(["inspect", "--model", pretrain(workspace), "--overlap"]) == 4

    def test_invalid_config(self, workspace):
        assert main(["pretrain", *train_args(workspace, "--chi", "0"), "--out", str(workspace / "m")]) == 4

    def test_usage_error(self, capsys):
        assert main(["pretrain"]) == 4
        assert "--train-images" in capsys.readouterr().err

    def test_unknown_option(self):
        assert main(["smooth", "--grid", "many"]) == 4

    def test_help(self):
        assert main(["--help"]) == 0
