"""Clustering accuracy under the best label matching, and NMI."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import LengthMismatchError

__all__ = [
    "ContingencyTable",
    "contingency",
    "hungarian_assignment",
    "clustering_accuracy",
    "nmi",
    "entropy",
]


@dataclass
class ContingencyTable:
    """``counts[p, q]`` = number of samples with predicted ``p`` and true ``q``."""

    counts: np.ndarray

    @property
    def row_marginals(self):
        return self.counts.sum(axis=1)

    @property
    def col_marginals(self):
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def _check(predicted, truth):
    p = np.asarray(predicted).ravel()
    t = np.asarray(truth).ravel()
    if p.shape != t.shape:
        raise LengthMismatchError(f"label vectors differ in length ({p.size} vs {t.size})")
    return p, t


def contingency(predicted, truth) -> ContingencyTable:
    p, t = _check(predicted, truth)
    _, pi = np.unique(p, return_inverse=True)
    _, ti = np.unique(t, return_inverse=True)
    counts = np.zeros((pi.max() + 1 if p.size else 0, ti.max() + 1 if t.size else 0), dtype=np.int64)
    np.add.at(counts, (pi, ti), 1)
    return ContingencyTable(counts=counts)


def hungarian_assignment(cost) -> np.ndarray:
    """Permutation ``perm`` minimizing ``sum_r cost[r, perm[r]]``."""
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError("cost matrix must be square")
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(cost.shape[0], dtype=np.int64)
    perm[rows] = cols
    return perm


def clustering_accuracy(predicted, truth) -> float:
    """Fraction of samples whose predicted cluster, mapped through the best
    one-to-one matching onto true labels, equals the true label."""
    p, t = _check(predicted, truth)
    if p.size == 0:
        return 1.0
    counts = contingency(p, t).counts
    k = max(counts.shape)
    square = np.zeros((k, k), dtype=np.int64)
    square[: counts.shape[0], : counts.shape[1]] = counts
    perm = hungarian_assignment(-square)
    return float(square[np.arange(k), perm].sum()) / p.size


def entropy(labels) -> float:
    _, counts = np.unique(np.asarray(labels).ravel(), return_counts=True)
    q = counts / counts.sum()
    # fsum is correctly rounded, so the value does not depend on label order
    return -math.fsum(q * np.log(q))


def nmi(predicted, truth) -> float:
    """``MI / max(H(pred), H(truth))`` with natural logarithms.

    When both partitions have zero entropy the value is 1 if they are
    identical and 0 otherwise.
    """
    p, t = _check(predicted, truth)
    if p.size == 0:
        raise LengthMismatchError("at least one sample is required")
    table = contingency(p, t).counts
    if table.shape[0] == table.shape[1] and np.all((table > 0).sum(axis=0) == 1) \
            and np.all((table > 0).sum(axis=1) == 1):
        # identical partitions up to relabeling: MI equals both entropies
        return 1.0
    # every term depends only on integer counts, so relabeling permutes
    # identical terms and the correctly rounded sum is unchanged
    n = int(table.sum())
    ni = table.sum(axis=1)
    nj = table.sum(axis=0)
    r, q = np.nonzero(table)
    nij = table[r, q].astype(np.float64)
    mi = math.fsum(nij / n * np.log(nij * n / (ni[r].astype(np.float64) * nj[q])))
    hp = entropy(p)
    ht = entropy(t)
    denom = max(hp, ht)
    if denom == 0.0:
        same = np.array_equal(np.unique(p, return_inverse=True)[1], np.unique(t, return_inverse=True)[1])
        return 1.0 if same else 0.0
    return float(min(max(mi / denom, 0.0), 1.0))
