"""Support regularized sparse graphs (SRSG) for subspace clustering."""

from ._backend import BACKEND
from .data import Dataset, KnnGraph, build_knn_graph, load_dataset, normalize_columns

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Dataset",
    "KnnGraph",
    "build_knn_graph",
    "load_dataset",
    "normalize_columns",
]
