"""Vanilla sparse graph: per-column lasso codes used to initialize SRSG."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import List

import numpy as np

from . import _backend
from ._util import NONZERO_TOL, nonzero_mask
from .data import Dataset
from .errors import DimensionError, ParameterError

__all__ = [
    "LassoConfig",
    "LassoColumn",
    "SparseCodeMatrix",
    "solve_lasso_column",
    "build_l1_codes",
    "kkt_residual",
    "lasso_objective",
]


@dataclass(frozen=True)
class LassoConfig:
    """Settings for ``min ||x_i - X z||^2 + lambda_l1 * ||z||_1`` with ``z_i = 0``."""

    lambda_l1: float = 0.1
    max_iters: int = 10000
    kkt_tol: float = 1e-6

    def __post_init__(self):
        if not self.lambda_l1 > 0:
            raise ParameterError("lambda_l1 must be positive")
        if not self.kkt_tol > 0:
            raise ParameterError("kkt_tol must be positive")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be >= 1")


@dataclass
class LassoColumn:
    z: np.ndarray
    residual: float
    converged: bool
    sweeps: int


@dataclass
class SparseCodeMatrix:
    """Coefficient matrix ``Z`` (n x n) with zero diagonal; column ``i``
    holds the code of sample ``i``."""

    codes: np.ndarray
    unconverged: List[int] = field(default_factory=list)

    def __post_init__(self):
        codes = np.asarray(self.codes, dtype=np.float64)
        if codes.ndim != 2 or codes.shape[0] != codes.shape[1]:
            raise DimensionError(f"code matrix must be square, got {codes.shape}")
        if np.any(np.diag(codes) != 0.0):
            raise DimensionError("code matrix must have a zero diagonal")
        self.codes = codes

    @property
    def n(self) -> int:
        return self.codes.shape[0]

    @cached_property
    def supports(self) -> List[np.ndarray]:
        mask = nonzero_mask(self.codes)
        return [np.flatnonzero(mask[:, i]) for i in range(self.n)]

    def support(self, i: int) -> np.ndarray:
        return self.supports[i]


def lasso_objective(data: Dataset, i: int, z, lam: float) -> float:
    r = data.points[:, i] - data.points @ z
    return float(r @ r + lam * np.abs(z).sum())


def kkt_residual(data: Dataset, i: int, z, lam: float) -> float:
    """Optimality residual of the lasso problem for column ``i``.

    With the half-gradient ``g = X'(Xz - x_i)``, a coordinate ``t != i``
    contributes ``|g_t + (lam/2) sign(z_t)|`` when ``z_t != 0`` and
    ``max(|g_t| - lam/2, 0)`` otherwise. The residual is zero iff ``z``
    is optimal.
    """
    X = data.points
    z = np.asarray(z, dtype=np.float64)
    g = X.T @ (X @ z - X[:, i])
    half = 0.5 * lam
    res = np.where(z != 0, np.abs(g + half * np.sign(z)), np.maximum(np.abs(g) - half, 0.0))
    res[i] = 0.0
    return float(res.max()) if res.size else 0.0


def _solve(gram, i, cfg, kernels):
    z = np.zeros(gram.shape[0])
    b = np.ascontiguousarray(gram[:, i])
    sweeps, res = kernels.lasso_cd(gram, b, i, cfg.lambda_l1, cfg.max_iters, cfg.kkt_tol, z)
    z[i] = 0.0
    return LassoColumn(z=z, residual=float(res), converged=bool(res <= cfg.kkt_tol), sweeps=int(sweeps))


def solve_lasso_column(data: Dataset, i: int, cfg: LassoConfig = LassoConfig(), gram=None) -> LassoColumn:
    """Lasso code of sample ``i`` over the remaining samples.

    Coordinate ``i`` is excluded from the optimization, so the returned
    code has ``z[i] == 0`` exactly. Non-convergence is reported through
    ``LassoColumn.converged`` rather than raised.
    """
    if not 0 <= i < data.n:
        raise ParameterError(f"column index {i} out of range")
    if gram is None:
        gram = np.ascontiguousarray(data.points.T @ data.points)
    return _solve(gram, i, cfg, _backend.kernels)


def build_l1_codes(data: Dataset, cfg: LassoConfig = LassoConfig(), n_jobs: int = 1) -> SparseCodeMatrix:
    """Solve the lasso for every column; columns are independent.

    Coefficients with magnitude at or below the shared nonzero threshold
    are set to exactly zero.
    """
    n = data.n
    gram = np.ascontiguousarray(data.points.T @ data.points)
    kernels = _backend.kernels
    if n_jobs == 1:
        cols = [_solve(gram, i, cfg, kernels) for i in range(n)]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs if n_jobs > 0 else None) as pool:
            cols = list(pool.map(lambda i: _solve(gram, i, cfg, kernels), range(n)))
    Z = np.column_stack([col.z for col in cols]) if n else np.zeros((0, 0))
    Z[np.abs(Z) <= NONZERO_TOL] = 0.0
    unconverged = [i for i, col in enumerate(cols) if not col.converged]
    return SparseCodeMatrix(codes=Z, unconverged=unconverged)
