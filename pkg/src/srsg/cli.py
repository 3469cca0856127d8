"""Command-line entry point: ``srsg --data heart.csv --clusters 2 --out runs/heart``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import ConfigError, DatasetIOError, DimensionError, ParseError, SRSGError
from .experiment import (
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    ExperimentConfig,
    config_from_manifest,
    load_config_file,
    run_experiment,
)

__all__ = ["main", "build_parser"]

# flag name -> ExperimentConfig field
_FLAGS = {
    "data": "data",
    "format": "format",
    "delimiter": "delimiter",
    "clusters": "clusters",
    "gamma": "gamma",
    "knn": "k_neighbors",
    "lambda_l1": "lambda_l1",
    "epsilon": "epsilon",
    "max_outer": "max_outer",
    "max_inner": "max_inner",
    "seed": "seed",
    "mode": "update_mode",
    "knn_space": "knn_space",
    "kmeans_restarts": "kmeans_restarts",
    "jobs": "n_jobs",
    "probe_column": "probe_columns",
    "out": "out",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _report("usage", message)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="srsg", description="Support regularized sparse graph clustering.")
    p.add_argument("--config", help="flat 'key = value' file; flags override its values")
    p.add_argument("--manifest", help="re-run with the configuration stored in a manifest.json")
    p.add_argument("--data", help="dataset file, one sample per row")
    p.add_argument("--format", choices=("csv", "labeled_csv"),
                   help="labeled_csv: last column is the class label (default)")
    p.add_argument("--delimiter", help="field separator; 'whitespace' splits on runs of blanks")
    p.add_argument("--clusters", type=int, help="number of clusters")
    p.add_argument("--gamma", type=float, help="support regularization weight (0.1)")
    p.add_argument("--knn", type=int, help="neighbors per sample (5)")
    p.add_argument("--lambda-l1", type=float, help="lasso weight for the initial codes (0.1)")
    p.add_argument("--epsilon", type=float, help="outer stopping tolerance on the objective (1e-5)")
    p.add_argument("--max-outer", type=int, help="coordinate descent rounds (100)")
    p.add_argument("--max-inner", type=int, help="FPGD-SP iterations per column (1000)")
    p.add_argument("--seed", type=int, help="master seed (0)")
    p.add_argument("--mode", choices=("gauss_seidel", "jacobi"), help="column update order")
    p.add_argument("--knn-space", choices=("normalized", "raw"),
                   help="points used for neighbor search (normalized)")
    p.add_argument("--kmeans-restarts", type=int, help="k-means restarts in spectral clustering (20)")
    p.add_argument("--jobs", type=int, help="worker threads for lasso and Jacobi sweeps (1)")
    p.add_argument("--probe-column", type=int, action="append",
                   help="keep the final inner trace of this column (repeatable)")
    p.add_argument("--out", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return p


def _report(kind: str, message: str, **extra) -> None:
    payload = {"error": kind, "message": message}
    payload.update(extra)
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


def resolve_config(args) -> ExperimentConfig:
    if args.manifest:
        cfg = config_from_manifest(args.manifest)
    else:
        cfg = ExperimentConfig()
    if args.config:
        cfg = ExperimentConfig.from_mapping(load_config_file(args.config), base=cfg)
    overrides = {}
    for flag, key in _FLAGS.items():
        val = getattr(args, flag)
        if val is not None:
            overrides[key] = val
    return ExperimentConfig.from_mapping(overrides, base=cfg)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # --help exits 0, usage errors exit 1
        return int(exc.code or 0)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        outcome = run_experiment(cfg)
    except (DatasetIOError, ParseError, DimensionError) as exc:
        # unreadable or malformed input files
        _report("io", str(exc), type=type(exc).__name__, row=getattr(exc, "row", None))
        return EXIT_IO
    except ConfigError as exc:
        _report("config", str(exc), type=type(exc).__name__)
        return EXIT_USAGE
    except SRSGError as exc:
        _report("usage", str(exc), type=type(exc).__name__)
        return EXIT_USAGE
    except OSError as exc:
        _report("io", str(exc), type=type(exc).__name__)
        return EXIT_IO
    for key in ("accuracy", "nmi", "rounds", "converged"):
        if key in outcome.metrics:
            print(f"{key} = {outcome.metrics[key]}")
    if outcome.exit_code != EXIT_OK:
        _report("numerical", "some columns were not certified; see manifest.json",
                stationarity_failures=outcome.manifest["certificates"]["stationarity_failures"])
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
