"""End-to-end runs: load, build the graph, cluster, evaluate, export."""

from __future__ import annotations

import json
import logging
import shutil
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import _backend, io
from .builder import BuilderConfig, learn_srsg
from .data import build_knn_graph, dataset_checksum, load_dataset, normalize_columns
from .diagnostics import rate_report
from .errors import ConfigError, DatasetIOError, ParameterError, SRSGError
from .fpgd import SolverConfig, run_fpgd
from .l1graph import LassoConfig, build_l1_codes
from .metrics import clustering_accuracy, nmi
from .spectral import spectral_cluster
from .support import support_coefficients

logger = logging.getLogger(__name__)

__all__ = [
    "ExperimentConfig",
    "ExperimentOutcome",
    "load_config_file",
    "run_experiment",
    "stage_seed",
    "trace_probe",
    "write_probe",
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_IO",
    "EXIT_NONCERTIFIED",
]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NONCERTIFIED = 3

_STAGES = {"spectral": 1}


@dataclass
class ExperimentConfig:
    data: str = ""
    format: str = "labeled_csv"
    delimiter: str = ","
    clusters: int = 2
    lambda_l1: float = 0.1
    gamma: float = 0.1
    k_neighbors: int = 5
    max_outer: int = 100
    max_inner: int = 1000
    epsilon: float = 1e-5
    seed: int = 0
    update_mode: str = "gauss_seidel"
    knn_space: str = "normalized"
    kmeans_restarts: int = 20
    n_jobs: int = 1
    probe_columns: List[int] = field(default_factory=list)
    out: str = "srsg_out"

    def validate(self):
        if not self.data:
            raise ParameterError("no dataset given")
        if self.format not in ("csv", "labeled_csv"):
            raise ParameterError(f"unknown format {self.format!r}")
        if self.clusters < 2:
            raise ParameterError("clusters must be >= 2")
        if self.knn_space not in ("normalized", "raw"):
            raise ParameterError("knn_space must be 'normalized' or 'raw'")
        if self.max_inner < 1 or self.kmeans_restarts < 1:
            raise ParameterError("max_inner and kmeans_restarts must be >= 1")
        self.builder_config()

    def builder_config(self) -> BuilderConfig:
        return BuilderConfig(
            gamma=self.gamma,
            k_neighbors=self.k_neighbors,
            max_outer=self.max_outer,
            outer_tol=self.epsilon,
            solver=SolverConfig(max_iters=self.max_inner),
            lasso=LassoConfig(lambda_l1=self.lambda_l1),
            update_mode=self.update_mode,
            n_jobs=self.n_jobs,
        )

    @classmethod
    def from_mapping(cls, values: dict, base: Optional["ExperimentConfig"] = None) -> "ExperimentConfig":
        """Build from string or typed values; unknown keys are errors."""
        cfg = base or cls()
        known = {f.name: f for f in fields(cls)}
        for key, raw in values.items():
            if key not in known:
                raise ConfigError(f"unknown configuration key {key!r}")
            setattr(cfg, key, _coerce(key, raw, getattr(cls(), key)))
        return cfg


def _coerce(key, raw, default):
    if not isinstance(raw, str):
        if isinstance(default, list):
            return [int(x) for x in raw]
        return type(default)(raw)
    text = raw.strip()
    try:
        if isinstance(default, bool):
            return text.lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, list):
            return [int(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return text


def load_config_file(path) -> dict:
    """Flat ``key = value`` file (``#`` starts a comment line)."""
    try:
        return io.read_kv(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except SRSGError as exc:
        raise ConfigError(str(exc)) from exc


def stage_seed(master: int, stage: str) -> int:
    """Deterministic per-stage seed derived from the master seed."""
    ss = np.random.SeedSequence([int(master), _STAGES[stage]])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


@dataclass
class ExperimentOutcome:
    exit_code: int
    out_dir: Optional[Path]
    metrics: dict
    manifest: dict


def write_probe(path, trace, z_raw, column, data, c, gamma, extra=None):
    """Inner trace with per-iteration gap and bound, plus a summary file
    ``<stem>_summary.txt`` holding ``k0``, ``F(z*)`` and ``U``."""
    path = Path(path)
    rep = rate_report(trace, z_raw, column, data, c, gamma)
    header = io.INNER_HEADER + ("gap", "bound")
    rows = (row + (float(rep.gap[k]), float(rep.bound[k])) for k, row in enumerate(trace.rows()))
    io.write_table(path, header, rows)
    summary = {"column": column}
    summary.update(extra or {})
    summary.update({
        "k0": rep.k0,
        "f_star": rep.f_star,
        "U": rep.U,
        "step_s": trace.step_s,
        "step_eta": trace.step_eta,
        "status": trace.status,
        "certified": trace.certified,
        "iterations": trace.iterations,
    })
    io.write_kv(path.with_name(path.stem + "_summary.txt"), summary)
    return rep


def _probe_files(out, result, data, cfg):
    for col, probe in sorted(result.probes.items()):
        write_probe(out / f"probe_{col}.csv", probe.trace, probe.z_raw, col, data,
                    probe.coefficients, cfg.gamma, extra={"round": probe.round})


def trace_probe(cfg: ExperimentConfig, column: int, codes=None, path=None) -> Path:
    """Run one inner FPGD-SP solve on ``column`` and write its trace.

    The support coefficients and the starting point come from ``codes``
    (default: the lasso initialization). The file lands in
    ``cfg.out/probe_<column>.csv`` unless ``path`` is given.
    """
    cfg.validate()
    raw = load_dataset(cfg.data, cfg.format, None if cfg.delimiter == "whitespace" else cfg.delimiter)
    if not 0 <= column < raw.n:
        raise ParameterError(f"probe column {column} out of range (n={raw.n})")
    data = normalize_columns(raw)
    knn = build_knn_graph(data if cfg.knn_space == "normalized" else raw, cfg.k_neighbors)
    bcfg = cfg.builder_config()
    if codes is None:
        codes = build_l1_codes(data, bcfg.lasso, n_jobs=cfg.n_jobs).codes
    Z = np.asarray(getattr(codes, "codes", codes), dtype=np.float64)
    c = support_coefficients(Z, knn, column)
    z_raw, trace = run_fpgd(Z[:, column].copy(), column, data, c, cfg.gamma, bcfg.solver)
    if path is None:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"probe_{column}.csv"
    write_probe(path, trace, z_raw, column, data, c, cfg.gamma)
    return Path(path)


def run_experiment(cfg: ExperimentConfig) -> ExperimentOutcome:
    """Run the full pipeline and write every artifact into ``cfg.out``.

    Raises :class:`~srsg.errors.SRSGError` subclasses on failure; the
    output directory is removed again if it was created by this call.
    """
    cfg.validate()
    for p in cfg.probe_columns:
        if p < 0:
            raise ParameterError(f"probe column {p} out of range")
    raw = load_dataset(cfg.data, cfg.format, None if cfg.delimiter == "whitespace" else cfg.delimiter)
    if cfg.format == "labeled_csv" and raw.num_classes is not None and raw.num_classes < 1:
        raise ParameterError("dataset has no labels")
    for p in cfg.probe_columns:
        if p >= raw.n:
            raise ParameterError(f"probe column {p} out of range (n={raw.n})")

    out = Path(cfg.out)
    created = not out.exists()
    try:
        out.mkdir(parents=True, exist_ok=True)
        return _run(cfg, raw, out)
    except BaseException:
        if created:
            shutil.rmtree(out, ignore_errors=True)
        raise


def _run(cfg, raw, out):
    timings = {}
    t0 = time.perf_counter()
    data = normalize_columns(raw)
    knn = build_knn_graph(data if cfg.knn_space == "normalized" else raw, cfg.k_neighbors)
    timings["preprocess_seconds"] = time.perf_counter() - t0

    bcfg = cfg.builder_config()
    result = learn_srsg(data, bcfg, knn=knn, probe_columns=cfg.probe_columns)
    timings["lasso_init_seconds"] = result.stage_seconds["init"]
    timings["coordinate_descent_seconds"] = result.stage_seconds["coordinate_descent"]

    t0 = time.perf_counter()
    spectral_seed = stage_seed(cfg.seed, "spectral")
    clus = spectral_cluster(result.graph, cfg.clusters, seed=spectral_seed, restarts=cfg.kmeans_restarts)
    timings["spectral_seconds"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    metrics = {
        "n": data.n,
        "d": data.d,
        "clusters": cfg.clusters,
        "rounds": len(result.rounds),
        "converged": result.converged,
        "objective": result.rounds[-1].objective if result.rounds else result.initial_objective,
        "inertia": clus.inertia,
        "degenerate_embedding": clus.degenerate,
        "connected_components": clus.n_components,
    }
    if data.labels is not None:
        metrics["accuracy"] = clustering_accuracy(clus.labels, data.labels)
        metrics["nmi"] = nmi(clus.labels, data.labels)
    timings["metrics_seconds"] = time.perf_counter() - t0

    io.write_triplets(out / "codes.triplets", result.codes)
    io.write_triplets(out / "similarity.triplets", result.graph)
    io.write_dense(out / "codes.csv", result.codes)
    io.write_dense(out / "similarity.csv", result.graph)
    io.write_labels(out / "labels.txt", clus.labels)
    io.write_dense(out / "embedding.csv", clus.embedding)
    io.write_kv(out / "metrics.txt", metrics)
    io.write_table(out / "metrics.tsv", ("key", "value"), metrics.items(), delimiter="\t")
    io.write_kv(out / "timings.txt", timings)
    io.write_outer_trace(out / "outer_trace.csv", result.rounds)
    _probe_files(out, result, data, cfg)

    cert_fail = [r.column for r in result.columns if r.written and not r.certificate_passed]
    final_round = len(result.rounds)
    noncert_final = [i for (r, i) in result.noncertified if r == final_round]
    manifest = {
        "config": asdict(cfg),
        "seeds": {"master": cfg.seed, "spectral": spectral_seed},
        "backend": _backend.BACKEND,
        "update_mode": result.mode,
        "dataset": dataset_checksum(raw),
        "converged": result.converged,
        "rounds": final_round,
        "noncertified": [list(x) for x in result.noncertified],
        "certificates": {
            "epsilon": bcfg.certificate_eps,
            "columns": [asdict(r) for r in result.columns],
            "stationarity_failures": cert_fail,
        },
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    code = EXIT_NONCERTIFIED if (cert_fail or noncert_final) else EXIT_OK
    return ExperimentOutcome(exit_code=code, out_dir=out, metrics=metrics, manifest=manifest)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(type(obj))


def config_from_manifest(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            manifest = json.load(fh)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    return ExperimentConfig.from_mapping(manifest.get("config", {}))


__all__ += ["config_from_manifest", "DatasetIOError"]
