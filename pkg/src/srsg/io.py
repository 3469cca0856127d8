"""Plain-text artifact formats.

Floats are written with ``repr`` so every value reloads bit-exactly.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import ParseError

__all__ = [
    "write_triplets",
    "read_triplets",
    "write_dense",
    "read_dense",
    "write_labels",
    "read_labels",
    "write_kv",
    "read_kv",
    "write_table",
    "read_table",
    "write_inner_trace",
    "write_outer_trace",
]


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_triplets(path, matrix) -> None:
    """Nonzero entries as ``row col value`` lines after a ``# rows cols`` header."""
    A = np.asarray(getattr(matrix, "codes", getattr(matrix, "weights", matrix)), dtype=np.float64)
    rows, cols = np.nonzero(A)
    with open(path, "w") as fh:
        fh.write(f"# {A.shape[0]} {A.shape[1]}\n")
        for r, c in zip(rows, cols):
            fh.write(f"{r} {c} {repr(float(A[r, c]))}\n")


def read_triplets(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3 or header[0] != "#":
            raise ParseError(f"{path}: missing '# rows cols' header", row=1)
        A = np.zeros((int(header[1]), int(header[2])))
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise ParseError(f"{path}: malformed triplet", row=lineno)
            A[int(parts[0]), int(parts[1])] = float(parts[2])
    return A


def write_dense(path, matrix, delimiter: str = ",") -> None:
    A = np.atleast_2d(np.asarray(getattr(matrix, "codes", getattr(matrix, "weights", matrix)), dtype=np.float64))
    with open(path, "w") as fh:
        for row in A:
            fh.write(delimiter.join(repr(float(x)) for x in row) + "\n")


def read_dense(path, delimiter: str = ",") -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                rows.append([float(x) for x in line.strip().split(delimiter)])
    return np.array(rows, dtype=np.float64)


def write_labels(path, labels) -> None:
    with open(path, "w") as fh:
        for x in np.asarray(labels).ravel():
            fh.write(f"{int(x)}\n")


def read_labels(path) -> np.ndarray:
    with open(path) as fh:
        return np.array([int(line) for line in fh if line.strip()], dtype=np.int64)


def write_kv(path, values: Mapping) -> None:
    """One ``key = value`` pair per line."""
    with open(path, "w") as fh:
        for key, val in values.items():
            fh.write(f"{key} = {_fmt(val)}\n")


def read_kv(path) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"{path}: expected 'key = value'", row=lineno)
            key, val = (part.strip() for part in line.split("=", 1))
            out[key] = val
    return out


def write_table(path, header: Iterable[str], rows: Iterable[Iterable], delimiter: str = ",") -> None:
    with open(path, "w") as fh:
        fh.write(delimiter.join(header) + "\n")
        for row in rows:
            fh.write(delimiter.join(_fmt(x) for x in row) + "\n")


def read_table(path, delimiter: str = ","):
    """Return ``(header, columns)`` with each column as a float array."""
    with open(path) as fh:
        header = fh.readline().strip().split(delimiter)
        data = [line.strip().split(delimiter) for line in fh if line.strip()]
    cols = {}
    for j, name in enumerate(header):
        cols[name] = np.array([float(r[j]) if r[j] not in ("true", "false") else r[j] == "true"
                               for r in data])
    return header, cols


INNER_HEADER = ("iteration", "objective", "support_size", "grad_norm", "s", "lambda_k")


def write_inner_trace(path, trace) -> None:
    write_table(path, INNER_HEADER, trace.rows())


def write_outer_trace(path, rounds) -> None:
    write_table(
        path,
        ("round", "objective", "delta", "inner_iterations", "noncertified", "rejected"),
        ((r.round, r.objective, r.delta, r.inner_iterations, r.noncertified, r.rejected) for r in rounds),
    )
