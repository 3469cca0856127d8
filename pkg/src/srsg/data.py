"""Datasets, column normalization and the K-nearest-neighbor adjacency."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DatasetIOError, DegenerateInputError, DimensionError, ParameterError, ParseError

logger = logging.getLogger(__name__)

__all__ = [
    "Dataset",
    "KnnGraph",
    "load_dataset",
    "normalize_columns",
    "build_knn_graph",
    "dataset_checksum",
]


@dataclass(frozen=True)
class Dataset:
    """Column matrix of samples.

    Attributes
    ----------
    points : ndarray, shape (d, n)
        One sample per column.
    labels : ndarray of int, shape (n,), optional
        Ground-truth labels, contiguous integers ``0..c-1``.
    names : sequence of str, optional
        Sample identifiers.
    """

    points: np.ndarray
    labels: Optional[np.ndarray] = None
    names: Optional[Sequence[str]] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise DimensionError(f"points must be a 2-D array, got shape {pts.shape}")
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.asarray(self.labels)
            if lab.shape != (pts.shape[1],):
                raise DimensionError(
                    f"labels have shape {lab.shape}, expected ({pts.shape[1]},)"
                )
            object.__setattr__(self, "labels", _contiguous_labels(lab))
        if self.names is not None and len(self.names) != pts.shape[1]:
            raise DimensionError("names must have one entry per sample")

    @property
    def d(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def num_classes(self) -> Optional[int]:
        if self.labels is None:
            return None
        return int(self.labels.max()) + 1 if self.labels.size else 0


@dataclass(frozen=True)
class KnnGraph:
    """Directed K-nearest-neighbor relation: ``adjacency[i, j] == 1`` iff
    sample ``j`` is one of the ``k`` nearest neighbors of sample ``i``."""

    adjacency: np.ndarray
    k: int
    neighbors: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.neighbors is None:
            nbrs = [np.flatnonzero(row) for row in self.adjacency]
            object.__setattr__(self, "neighbors", nbrs)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]


def _contiguous_labels(labels):
    labels = np.asarray(labels)
    uniq, inverse = np.unique(labels, return_inverse=True)
    return inverse.astype(np.int64).reshape(labels.shape)


def load_dataset(path, format: str = "csv", delimiter: Optional[str] = ",") -> Dataset:
    """Read a sample-per-row delimited text file.

    Parameters
    ----------
    path : str or Path
    format : {"csv", "labeled_csv"}
        In ``labeled_csv`` the last field of each record is an integer label.
    delimiter : str or None
        Field separator; ``None`` splits on runs of whitespace.

    Returns
    -------
    Dataset
        Points stored column-per-sample (transposed from disk layout).
    """
    if format not in ("csv", "labeled_csv"):
        raise ParameterError(f"unknown dataset format {format!r}")
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DatasetIOError(f"cannot read dataset {path}: {exc}") from exc

    rows = []
    labels = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split(delimiter) if delimiter is not None else stripped.split()
        fields = [f.strip() for f in fields]
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise DimensionError(
                f"row {lineno} has {len(fields)} fields, expected {width}", row=lineno
            )
        try:
            if format == "labeled_csv":
                if len(fields) < 2:
                    raise DimensionError(f"row {lineno} has no feature fields", row=lineno)
                label = float(fields[-1])
                if label != int(label):
                    raise ValueError(fields[-1])
                labels.append(int(label))
                values = [float(f) for f in fields[:-1]]
            else:
                values = [float(f) for f in fields]
        except ValueError as exc:
            raise ParseError(f"row {lineno}: non-numeric field ({exc})", row=lineno) from exc
        if not all(np.isfinite(values)):
            raise ParseError(f"row {lineno}: non-finite value", row=lineno)
        rows.append(values)

    if not rows:
        raise ParseError(f"{path} contains no records")
    points = np.array(rows, dtype=np.float64).T.copy()
    lab = np.array(labels, dtype=np.int64) if format == "labeled_csv" else None
    data = Dataset(points=points, labels=lab)
    logger.info("loaded %s: %s", path, dataset_checksum(data))
    return data


def dataset_checksum(data: Dataset) -> dict:
    """Shape and boundary values, for reproducibility logs."""
    flat = data.points.T.ravel()
    return {
        "rows": data.n,
        "cols": data.d,
        "first": float(flat[0]) if flat.size else None,
        "last": float(flat[-1]) if flat.size else None,
    }


def normalize_columns(data: Dataset) -> Dataset:
    """Scale every sample (column) to unit Euclidean norm.

    Raises
    ------
    DegenerateInputError
        If a column is identically zero.
    """
    norms = np.linalg.norm(data.points, axis=0)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateInputError(f"column {zero[0]} is the zero vector", index=int(zero[0]))
    return replace(data, points=data.points / norms)


def build_knn_graph(data: Dataset, k: int) -> KnnGraph:
    """Row-wise K-nearest-neighbor adjacency under Euclidean distance.

    Ties are broken towards the smaller sample index. The result is not
    symmetrized.
    """
    n = data.n
    if not (1 <= k < n):
        raise ParameterError(f"k must satisfy 1 <= k < n (k={k}, n={n})")
    pts = data.points.T
    dist = cdist(pts, pts, metric="sqeuclidean")
    np.fill_diagonal(dist, np.inf)
    order = np.argsort(dist, axis=1, kind="stable")[:, :k]
    adjacency = np.zeros((n, n), dtype=np.int8)
    rows = np.repeat(np.arange(n), k)
    adjacency[rows, order.ravel()] = 1
    neighbors = [np.sort(order[i]) for i in range(n)]
    return KnnGraph(adjacency=adjacency, k=k, neighbors=neighbors)
