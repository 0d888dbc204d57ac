"""Standardization embedding, k-means and silhouette-based selection of the cluster count."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ..core import DiversionSentryError, RngStream, ShipmentObservation, as_rng_stream
from ..validation import check_shipments
from .gaussian import EstimationError


class ClusteringError(DiversionSentryError, ValueError):
    pass


@dataclass(frozen=True)
class EmbeddingModel:
    """Per-modality centre and scale mapping (duration, power) to a unitless 2-vector."""

    duration_center: float
    duration_scale: float
    power_center: float
    power_scale: float

    def __post_init__(self):
        if not (self.duration_scale > 0 and self.power_scale > 0):
            raise EstimationError("embedding scales must be positive")

    @classmethod
    def fit(cls, X) -> "EmbeddingModel":
        X = check_shipments(X, min_samples=2)
        mean = X.mean(axis=0)
        std = X.std(axis=0, ddof=1)
        if not (std > 0).all():
            raise EstimationError("cannot standardize a modality with zero variance")
        return cls(float(mean[0]), float(std[0]), float(mean[1]), float(std[1]))

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        center = np.array([self.duration_center, self.power_center])
        scale = np.array([self.duration_scale, self.power_scale])
        return (X - center) / scale


def embed(model: EmbeddingModel, obs: ShipmentObservation) -> np.ndarray:
    return model.transform([obs.duration_days, obs.power])


class StandardEmbedding(TransformerMixin, BaseEstimator):
    """Transformer wrapper around :class:`EmbeddingModel`."""

    def fit(self, X, y=None):
        self.model_ = EmbeddingModel.fit(X)
        return self

    def transform(self, X):
        check_is_fitted(self, "model_")
        return self.model_.transform(check_shipments(X))


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    """1-based cluster labels plus centroids (row ``m - 1`` is cluster ``m``)."""

    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    inertia_history: tuple = field(default=(), repr=False)

    @property
    def n_clusters(self) -> int:
        return self.centroids.shape[0]


def _sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _kmeans_pp(points: np.ndarray, m: int, gen: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = [points[gen.integers(n)]]
    d2 = _sq_dists(points, centers[0][None, :])[:, 0]
    for _ in range(1, m):
        total = d2.sum()
        idx = gen.choice(n, p=d2 / total) if total > 0 else gen.integers(n)
        centers.append(points[idx])
        d2 = np.minimum(d2, _sq_dists(points, points[idx][None, :])[:, 0])
    return np.array(centers)


def _lloyd(points, centroids, max_iter, tol):
    history = []
    for _ in range(max_iter):
        d2 = _sq_dists(points, centroids)
        labels = np.argmin(d2, axis=1)
        history.append(float(d2[np.arange(len(points)), labels].sum()))
        new = np.empty_like(centroids)
        counts = np.bincount(labels, minlength=len(centroids))
        for j in range(len(centroids)):
            if counts[j]:
                new[j] = points[labels == j].mean(axis=0)
            else:
                # re-seed an empty cluster at the worst-fitted point
                far = int(np.argmax(d2[np.arange(len(points)), labels]))
                new[j] = points[far]
                labels[far] = j
        shift = np.sqrt(((new - centroids) ** 2).sum(axis=1)).max()
        centroids = new
        if shift < tol:
            break
    d2 = _sq_dists(points, centroids)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(len(points)), labels].sum())
    history.append(inertia)
    return labels, centroids, inertia, history


def kmeans(points, m: int, rng=None, n_init: int = 20, max_iter: int = 300, tol: float = 1e-10) -> ClusterAssignment:
    """k-means++ seeding, Lloyd iterations, best of ``n_init`` restarts by inertia."""
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if m < 1:
        raise ClusteringError("need at least one cluster")
    if len(X) < m or len(np.unique(X, axis=0)) < m:
        raise ClusteringError(f"cannot form {m} clusters from {len(np.unique(X, axis=0))} distinct points")
    gen = as_rng_stream(rng).generator()
    best = None
    for _ in range(n_init):
        labels, cents, inertia, hist = _lloyd(X, _kmeans_pp(X, m, gen), max_iter, tol)
        if best is None or inertia < best[2]:
            best = (labels, cents, inertia, hist)
    labels, cents, inertia, hist = best
    if len(np.unique(labels)) < m:
        raise ClusteringError(f"k-means left a cluster empty for m={m}")
    return ClusterAssignment(labels + 1, cents, inertia, tuple(hist))


def silhouette(points, assignment) -> float:
    """Mean silhouette width (Euclidean). Points in singleton clusters score 0."""
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    labels = np.asarray(getattr(assignment, "labels", assignment)) - 1
    M = int(labels.max()) + 1
    counts = np.bincount(labels, minlength=M)
    if M < 2 or (counts == 0).any():
        raise ClusteringError("silhouette needs at least two nonempty clusters")
    onehot = np.eye(M)[labels]
    n = len(X)
    s = np.empty(n)
    step = 2048
    sq = (X * X).sum(axis=1)
    for i in range(0, n, step):
        blk = slice(i, i + step)
        d2 = sq[blk, None] + sq[None, :] - 2.0 * X[blk] @ X.T
        D = np.sqrt(np.maximum(d2, 0.0))
        sums = D @ onehot
        own = labels[blk]
        rows = np.arange(sums.shape[0])
        own_n = counts[own]
        a = np.where(own_n > 1, sums[rows, own] / np.maximum(own_n - 1, 1), 0.0)
        mean_other = sums / counts
        mean_other[rows, own] = np.inf
        b = mean_other.min(axis=1)
        denom = np.maximum(a, b)
        with np.errstate(invalid="ignore", divide="ignore"):
            val = np.where(denom > 0, (b - a) / denom, 0.0)
        s[blk] = np.where(own_n > 1, val, 0.0)
    return float(s.mean())


def _first_best(candidates, scores) -> int:
    best_m, best_s = None, -np.inf
    for m, sc in zip(candidates, scores):
        if sc > best_s:
            best_m, best_s = m, sc
    return best_m


def silhouette_sweep(points, candidate_range=(2, 8), rng=None) -> list[tuple[int, float, ClusterAssignment]]:
    """Cluster for each candidate count and score each clustering."""
    lo, hi = candidate_range
    if lo < 2 or hi < lo:
        raise ClusteringError(f"invalid candidate range {candidate_range}")
    rng = as_rng_stream(rng)
    out = []
    for m in range(lo, hi + 1):
        a = kmeans(points, m, rng.substream(m))
        out.append((m, silhouette(points, a), a))
    return out


def select_m(points, candidate_range=(2, 8), rng=None) -> int:
    """Cluster count with the highest mean silhouette; ties go to the smaller count."""
    sweep = silhouette_sweep(points, candidate_range, rng)
    return _first_best([m for m, _, _ in sweep], [s for _, s, _ in sweep])
