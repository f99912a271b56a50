# src/cli/app.py
"""
Command line entry point.

  pretrain   build one compressed digit wavefunction per label and save them
  classify   test accuracy of a saved model set
  sample     binary or grey-scale images drawn from one label's model
  inspect    Schmidt spectra, overlaps to the exact sums, negative log-likelihoods
  smooth     the broadened delta of a feature map, as a CSV curve
  benchmark  accuracy and overlap for a list of chi values
"""
import argparse
import logging
import sys
from typing import List, Optional

import numpy as np
from dotenv import load_dotenv

from src.config import build_config, env_workers
from src.errors import ConfigError, MpsrError
from src.init import (
    run_benchmark,
    run_classify,
    run_inspect,
    run_pretrain,
    run_sample,
    run_smooth,
    setup_logging,
)

logger = logging.getLogger(__name__)


def _add_training_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--train-images", required=True)
    p.add_argument("--train-labels", required=True)
    p.add_argument("--map", dest="map_id", default="cos-sin", help="cos-sin, phased, indicator or sin-N")
    p.add_argument("--chi", type=int, default=16)
    p.add_argument("--strategy", choices=["direct", "tree"], default="tree")
    p.add_argument("--leaf-batch", type=int)
    p.add_argument("--sweeps", type=int, default=2)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--downscale", type=int, default=2)
    p.add_argument("--binarize", type=float, help="threshold in [0, 1]")
    p.add_argument("--order", dest="pixel_order", choices=["raster", "snake"], default="raster")
    p.add_argument("--per-class-limit", type=int, help="keep the first M images of each label")
    p.add_argument("--workers", type=int, default=1, help="overridden by MPSR_WORKERS")
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sumstate", description="MPS Born machines from summed product states")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pretrain", help="build and save a model set")
    _add_training_args(p)
    p.add_argument("--out", required=True, help="model file (.mpsm)")

    p = sub.add_parser("classify", help="test accuracy of a model set")
    p.add_argument("--model", required=True)
    p.add_argument("--test-images", required=True)
    p.add_argument("--test-labels", required=True)
    p.add_argument("--metrics", help="CSV file for the metrics row")
    p.add_argument("--xlsx", help="workbook file for the metrics row")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("sample", help="draw images from one label's model")
    p.add_argument("--model", required=True)
    p.add_argument("--label", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--mode", choices=["binary", "grey"], default="binary")
    p.add_argument("--grey-map", default="phased")
    p.add_argument("--seed", type=int)
    p.add_argument("--outdir", default="samples")

    p = sub.add_parser("inspect", help="diagnostics of a model set")
    p.add_argument("--model", required=True)
    p.add_argument("--schmidt", type=int, metavar="CUT", help="print the Schmidt spectrum at this cut")
    p.add_argument("--overlap", action="store_true", help="squared overlap to the exact sum of each label")
    p.add_argument("--nll", action="store_true", help="mean negative log-likelihood of the training images")
    p.add_argument("--train-images")
    p.add_argument("--train-labels")
    p.add_argument("--subset", type=int, metavar="M", help="use the first M images of each label")
    p.add_argument("--estimate", action="store_true", help="estimate C_Norm from a random subset beyond the cap")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("smooth", help="broadened delta of a feature map")
    p.add_argument("--map", dest="map_id", default="phased")
    p.add_argument("--xi", type=float, default=0.5)
    p.add_argument("--grid", type=int, default=1000)
    p.add_argument("--out", help="CSV file for the curve")

    p = sub.add_parser("benchmark", help="accuracy and overlap for several chi values")
    _add_training_args(p)
    p.add_argument("--test-images", required=True)
    p.add_argument("--test-labels", required=True)
    p.add_argument("--chis", type=int, nargs="+", required=True)
    p.add_argument("--with-overlap", action="store_true")
    p.add_argument("--outdir", default=".")
    p.add_argument("--metrics", default="metrics.csv")
    p.add_argument("--xlsx")
    return parser


def _config(args: argparse.Namespace, **extra):
    return build_config(
        map_id=args.map_id, chi=args.chi, strategy=args.strategy, leaf_batch=args.leaf_batch,
        sweeps=args.sweeps, tol=args.tol, downscale=args.downscale, binarize=args.binarize,
        pixel_order=args.pixel_order, seed=args.seed, worker_limit=args.workers,
        per_class_limit=args.per_class_limit, train_images=args.train_images,
        train_labels=args.train_labels, **extra,
    )


def dispatch(args: argparse.Namespace) -> None:
    if args.command == "pretrain":
        run_pretrain(_config(args), args.out)
    elif args.command == "classify":
        report = run_classify(args.model, args.test_images, args.test_labels, env_workers(args.workers),
                              args.metrics, args.xlsx)
        print(f"accuracy {report.accuracy:.4f} on {report.n_items} items")
    elif args.command == "sample":
        paths = run_sample(args.model, args.label, args.count, args.mode, args.outdir, args.grey_map, args.seed)
        print(f"{len(paths)} images written to {args.outdir}")
    elif args.command == "inspect":
        wants_data = args.overlap or args.nll
        if wants_data and not (args.train_images and args.train_labels):
            raise ConfigError("--overlap and --nll need --train-images and --train-labels")
        cfg = build_config()
        result = run_inspect(args.model, args.schmidt,
                             args.train_images if wants_data else None,
                             args.train_labels if wants_data else None,
                             args.subset, args.estimate, args.nll, cfg.max_pairs, args.seed, args.overlap)
        for label, spectrum in result.get("schmidt", {}).items():
            print(f"label {label} schmidt: {np.array2string(spectrum, precision=6)}")
        for label, value in result.get("overlap", {}).items():
            print(f"label {label} mean_sq_overlap: {value:.10f}")
        for label, value in result.get("nll", {}).items():
            print(f"label {label} nll: {value:.6f}")
    elif args.command == "smooth":
        summary = run_smooth(args.map_id, args.xi, args.grid, args.out)
        print(f"argmax {summary['argmax']:.6f} half_max_width {summary['half_max_width']:.6f}")
    elif args.command == "benchmark":
        cfg = _config(args, test_images=args.test_images, test_labels=args.test_labels, out_dir=args.outdir)
        for r in run_benchmark(cfg, args.chis, args.metrics, args.xlsx, args.with_overlap):
            print(f"chi {r.chi}: accuracy {r.accuracy:.4f} overlap {r.mean_sq_overlap:.6f}")


def main(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, run the command and return the process exit code"""
    load_dotenv()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # usage errors share the contract-violation code; 2 is reserved for malformed files
        return 0 if e.code in (0, None) else ConfigError.exit_code
    setup_logging()
    try:
        dispatch(args)
    except MpsrError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except KeyboardInterrupt:
        logger.info("Stopped by user.")
        return 130
    return 0


def run() -> None:
    sys.exit(main())
