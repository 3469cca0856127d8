"""Support distances, support-regularization coefficients and objectives.

The per-column coefficient ``c[t, i]`` counts, over the K neighbors ``j``
of sample ``i``, the neighbors whose code is zero at ``t`` minus those
whose code is nonzero at ``t``. The indicator form is taken literally:
the neighbor ``j == t`` contributes through the zero diagonal entry
``Z[t, t]``. Relative to the pairwise support distance, which skips the
two endpoints, this shifts ``c[t, i]`` by ``S[i, t]``; see
:func:`exact_coefficient_shift`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import nonzero_mask
from .data import Dataset, KnnGraph
from .errors import DimensionError, ParameterError

__all__ = [
    "SupportCoefficients",
    "ObjectiveParams",
    "support_distance",
    "support_coefficients",
    "coefficient_matrix",
    "exact_coefficient_shift",
    "full_objective",
    "column_objective",
    "simplified_objective",
    "regularizer",
]


@dataclass
class SupportCoefficients:
    """Coefficients ``c`` (n x n); column ``i`` drives the l0 term of column ``i``."""

    c: np.ndarray

    def column(self, i: int) -> np.ndarray:
        return self.c[:, i]

    def positive_set(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.c[:, i] > 0)

    def negative_set(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.c[:, i] < 0)


@dataclass(frozen=True)
class ObjectiveParams:
    gamma: float
    knn: KnnGraph

    def __post_init__(self):
        if not self.gamma > 0:
            raise ParameterError("gamma must be positive")


def support_distance(zi, zj, i: int, j: int) -> int:
    """Number of coordinates ``m`` not in ``{i, j}`` at which exactly one of
    the two codes is nonzero."""
    a = nonzero_mask(np.asarray(zi))
    b = nonzero_mask(np.asarray(zj))
    if a.shape != b.shape:
        raise DimensionError("codes must have the same length")
    diff = a ^ b
    diff[i] = False
    diff[j] = False
    return int(diff.sum())


def _as_codes(Z):
    return Z.codes if hasattr(Z, "codes") else np.asarray(Z)


def support_coefficients(Z, knn: KnnGraph, i: int) -> np.ndarray:
    """Column ``c[:, i]``: zero-count minus nonzero-count over the
    neighbors of ``i``. Integer valued, within ``[-K, K]``."""
    codes = _as_codes(Z)
    nbrs = knn.neighbors[i]
    used = nonzero_mask(codes[:, nbrs]).sum(axis=1)
    return (len(nbrs) - 2 * used).astype(np.float64)


def coefficient_matrix(Z, knn: KnnGraph) -> SupportCoefficients:
    """All columns of ``c`` at once: ``c = K - 2 * B S'`` with ``B`` the
    support indicator of ``Z``."""
    codes = _as_codes(Z)
    B = nonzero_mask(codes).astype(np.float64)
    deg = knn.adjacency.sum(axis=1).astype(np.float64)
    c = deg[None, :] - 2.0 * (B @ knn.adjacency.T.astype(np.float64))
    return SupportCoefficients(c=c)


def exact_coefficient_shift(knn: KnnGraph, i: int) -> np.ndarray:
    """Per-coordinate amount by which ``c[:, i]`` exceeds the coefficient
    of the exact one-directional regularizer ``sum_j S_ij d(z, Z^j)``.

    The exact expansion skips ``m == j`` inside each distance, so the
    neighbor ``j == t`` never penalizes coordinate ``t``; the literal
    indicator form counts it (``Z[t, t] == 0``) as ``+1``.
    """
    return knn.adjacency[i].astype(np.float64)


def regularizer(Z, knn: KnnGraph) -> float:
    """``sum_{i,j} S_ij d(Z^i, Z^j)`` over ordered pairs."""
    codes = _as_codes(Z)
    B = nonzero_mask(codes)
    rows, cols = np.nonzero(knn.adjacency)
    if rows.size == 0:
        return 0.0
    diff = B[:, rows] ^ B[:, cols]
    total = int(diff.sum())
    # drop m == i and m == j terms
    e = np.arange(rows.size)
    total -= int(diff[rows, e].sum()) + int(diff[cols, e].sum())
    # m == i == j cannot occur (no self loops)
    return float(total)


def full_objective(Z, data: Dataset, p: ObjectiveParams) -> float:
    """``sum_i ||x_i - X Z^i||^2 + gamma * sum_{i,j} S_ij d(Z^i, Z^j)``."""
    codes = _as_codes(Z)
    X = data.points
    if codes.shape != (data.n, data.n):
        raise DimensionError("code matrix shape does not match dataset")
    R = X - X @ codes
    return float(np.sum(R * R)) + p.gamma * regularizer(codes, p.knn)


def _fit(z, i, data):
    r = data.points[:, i] - data.points @ z
    return float(r @ r)


def _coef(coeffs, i):
    if isinstance(coeffs, SupportCoefficients):
        return coeffs.column(i)
    return np.asarray(coeffs, dtype=np.float64)


def column_objective(z, i: int, data: Dataset, coeffs, gamma: float) -> float:
    """``||x_i - X z||^2 + gamma * sum_t c_ti 1[z_t != 0]``.

    Equals the per-column SRSG objective with all other columns frozen,
    up to a constant independent of ``z`` (and the neighbor shift noted
    in the module docstring).
    """
    c = _coef(coeffs, i)
    nz = nonzero_mask(np.asarray(z))
    return _fit(z, i, data) + gamma * float(c[nz].sum())


def simplified_objective(z, i: int, data: Dataset, coeffs, gamma: float) -> float:
    """Like :func:`column_objective` but only positive coefficients penalize."""
    c = _coef(coeffs, i)
    nz = nonzero_mask(np.asarray(z)) & (c > 0)
    return _fit(z, i, data) + gamma * float(c[nz].sum())


def column_regularizer(z, i: int, Z, knn: KnnGraph) -> float:
    """``sum_j S_ij d(z, Z^j)`` evaluated directly (used as an oracle)."""
    codes = _as_codes(Z)
    total = 0
    for j in knn.neighbors[i]:
        total += support_distance(z, codes[:, j], i, j)
    return float(total)
