"""Normalized spectral clustering (Ng-Jordan-Weiss) and seeded K-means."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import ParameterError

logger = logging.getLogger(__name__)

__all__ = ["ClusteringResult", "SpectralEmbedding", "kmeans", "spectral_embedding", "spectral_cluster"]

MAX_DENSE_N = 3000


@dataclass
class ClusteringResult:
    labels: np.ndarray
    num_clusters: int
    inertia: float
    seed: int
    empty_clusters: int = 0
    degenerate: bool = False
    embedding: Optional[np.ndarray] = None
    eigenvalues: Optional[np.ndarray] = None
    n_components: int = 1


@dataclass
class SpectralEmbedding:
    vectors: np.ndarray
    values: np.ndarray
    operator: np.ndarray
    all_values: np.ndarray


def _plusplus(points, c, rng):
    n = points.shape[0]
    centers = np.empty((c, points.shape[1]))
    first = rng.integers(n)
    centers[0] = points[first]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for j in range(1, c):
        total = d2.sum()
        if total <= 0.0:
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers[j] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centers[j]) ** 2, axis=1))
    return centers


def _sq_dists(points, centers):
    d = (
        np.sum(points * points, axis=1)[:, None]
        - 2.0 * points @ centers.T
        + np.sum(centers * centers, axis=1)[None, :]
    )
    return np.maximum(d, 0.0)


def _lloyd(points, centers, max_iter, tol):
    c = centers.shape[0]
    reseeded = 0
    for _ in range(max_iter):
        d = _sq_dists(points, centers)
        labels = np.argmin(d, axis=1)
        new = centers.copy()
        counts = np.bincount(labels, minlength=c)
        for j in range(c):
            if counts[j]:
                new[j] = points[labels == j].mean(axis=0)
        empty = np.flatnonzero(counts == 0)
        if empty.size:
            # farthest points from their current centers
            far = np.argsort(-d[np.arange(points.shape[0]), labels], kind="stable")
            for j, idx in zip(empty, far):
                new[j] = points[idx]
            reseeded += empty.size
        shift = float(np.sqrt(np.max(np.sum((new - centers) ** 2, axis=1))))
        centers = new
        if shift < tol and not empty.size:
            break
    d = _sq_dists(points, centers)
    labels = np.argmin(d, axis=1)
    inertia = float(np.sum((points - centers[labels]) ** 2))
    return labels, centers, inertia, reseeded


def kmeans(points, c: int, seed: int = 0, restarts: int = 20, max_iter: int = 300,
           tol: float = 1e-10) -> ClusteringResult:
    """Lloyd's algorithm from ``restarts`` k-means++ initializations.

    The labeling with the smallest inertia wins; ties go to the earliest
    restart.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    n = points.shape[0]
    if not 1 <= c <= n:
        raise ParameterError(f"cluster count must satisfy 1 <= c <= n (c={c}, n={n})")
    if restarts < 1:
        raise ParameterError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        centers = _plusplus(points, c, rng)
        labels, centers, inertia, _ = _lloyd(points, centers, max_iter, tol)
        if best is None or inertia < best[1]:
            best = (labels, inertia)
    labels, inertia = best
    empty = c - np.unique(labels).size
    return ClusteringResult(labels=labels.astype(np.int64), num_clusters=c, inertia=inertia,
                            seed=seed, empty_clusters=int(empty))


def spectral_embedding(W, c: int, jitter: float = 1e-12) -> SpectralEmbedding:
    """Top ``c`` eigenvectors of ``D^-1/2 W D^-1/2``."""
    W = np.asarray(getattr(W, "weights", W), dtype=np.float64)
    deg = W.sum(axis=1)
    deg = np.where(deg > 0, deg, jitter)
    inv = 1.0 / np.sqrt(deg)
    A = inv[:, None] * W * inv[None, :]
    A = (A + A.T) / 2.0
    vals, vecs = np.linalg.eigh(A)
    order = np.argsort(vals, kind="stable")[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    return SpectralEmbedding(vectors=vecs[:, :c], values=vals[:c], operator=A, all_values=vals)


def spectral_cluster(W, c: int, seed: int = 0, restarts: int = 20) -> ClusteringResult:
    """Cluster the vertices of a similarity graph into ``c`` groups.

    Rows of the top-``c`` eigenvector matrix are scaled to unit norm (zero
    rows stay zero) and clustered with :func:`kmeans`. ``degenerate`` is
    set when the ``c``-th and ``(c+1)``-th eigenvalues coincide, i.e.
    the embedding is not determined by the graph.
    """
    W = np.asarray(getattr(W, "weights", W), dtype=np.float64)
    n = W.shape[0]
    if W.shape != (n, n):
        raise ParameterError("similarity matrix must be square")
    if not 2 <= c <= n:
        raise ParameterError(f"cluster count must satisfy 2 <= c <= n (c={c}, n={n})")
    if n > MAX_DENSE_N:
        warnings.warn(f"n={n} exceeds the supported dense scale ({MAX_DENSE_N})", RuntimeWarning)
    ncomp, _ = connected_components(W > 0, directed=False)
    if ncomp > c:
        warnings.warn(f"graph has {ncomp} connected components for {c} clusters", RuntimeWarning)
    emb = spectral_embedding(W, c)
    U = emb.vectors
    norms = np.linalg.norm(U, axis=1)
    U = np.where(norms[:, None] > 0, U / np.where(norms > 0, norms, 1.0)[:, None], 0.0)
    res = kmeans(U, c, seed=seed, restarts=restarts)
    tie = c < n and abs(emb.all_values[c - 1] - emb.all_values[c]) < 1e-10
    distinct = np.unique(np.round(U, 12), axis=0).shape[0]
    res.degenerate = bool(tie or distinct < c)
    res.embedding = U
    res.eigenvalues = emb.values
    res.n_components = int(ncomp)
    return res
