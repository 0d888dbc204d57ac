"""Multimodal CUSUM: one statistic over the joint (energy, power) likelihood per customer cluster."""
from __future__ import annotations

import numpy as np

from ..core import as_rng_stream
from ..stats import EmbeddingModel, EstimationError, GaussianParams, fit_gaussian, silhouette_sweep
from ..stats.clustering import _first_best
from ..validation import check_shipments
from .base import CusumDetector, ShiftSpec, TrainingError, shifted_mean


class MCusumDetector(CusumDetector):
    """Joint CUSUM on shipment energy ``e = duration * power`` and power.

    Training standardizes (duration, power), clusters the shipments with
    k-means choosing the cluster count by silhouette, then fits one Gaussian
    to energy and one to power inside every cluster. Given power, the
    duration carries no information beyond the energy, so the per-cluster
    joint density factorizes into the two fits.

    Parameters
    ----------
    shift : ShiftSpec
        Feasible upward mean shifts, applied to energy and power alike.
    threshold : float
        Alarm level for the statistic.
    m_range : tuple of int
        Inclusive range of cluster counts to try.
    random_state : int or RngStream
        Seed for k-means.

    Attributes
    ----------
    embedding_ : EmbeddingModel
    m_ : int
        Selected number of clusters.
    energy_g0_, power_g0_ : list of GaussianParams
        Per-cluster pre-change fits, sorted by typical duration (energy / power).
    labels_ : ndarray
        Training cluster labels (1-based) in the sorted order.
    silhouettes_ : dict
        Mean silhouette for each tried cluster count.
    """

    kind = "m_cusum"
    n_streams = 1
    _fitted_attr = "energy_g0_"

    def __init__(self, shift: ShiftSpec = ShiftSpec(), threshold: float = 10.0, m_range=(2, 8), random_state=0):
        self.shift = shift
        self.threshold = threshold
        self.m_range = m_range
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_shipments(X)
        lo, hi = self.m_range
        if len(X) < 10 * hi:
            raise TrainingError(f"M-CUSUM with m up to {hi} needs at least {10 * hi} shipments, got {len(X)}")
        self.embedding_ = EmbeddingModel.fit(X)
        W = self.embedding_.transform(X)
        sweep = silhouette_sweep(W, (lo, hi), as_rng_stream(self.random_state))
        self.silhouettes_ = {m: s for m, s, _ in sweep}
        m = _first_best([m for m, _, _ in sweep], [s for _, s, _ in sweep])
        labels = next(a for mm, _, a in sweep if mm == m).labels

        energy = X[:, 0] * X[:, 1]
        fits = []
        for c in range(1, m + 1):
            idx = labels == c
            if idx.sum() < 2:
                raise TrainingError(f"cluster {c} has {int(idx.sum())} shipment(s); at least 2 are needed")
            try:
                fits.append((fit_gaussian(energy[idx]), fit_gaussian(X[idx, 1]), c))
            except EstimationError as exc:
                raise TrainingError(f"cluster {c}: {exc}") from None
        fits.sort(key=lambda f: f[0].mean / f[1].mean)
        relabel = np.empty(m + 1, dtype=np.int64)
        for new, (_, _, old) in enumerate(fits, start=1):
            relabel[old] = new
        self.labels_ = relabel[labels]
        self.m_ = m
        return self._set_clusters([f[0] for f in fits], [f[1] for f in fits])

    def _set_clusters(self, energy_g0, power_g0):
        if len(energy_g0) != len(power_g0) or not energy_g0:
            raise TrainingError("need the same positive number of energy and power fits")
        self.energy_g0_ = list(energy_g0)
        self.power_g0_ = list(power_g0)
        self.m_ = len(energy_g0)
        self._e = (np.array([g.mean for g in energy_g0]), np.array([g.std for g in energy_g0]))
        self._z = (np.array([g.mean for g in power_g0]), np.array([g.std for g in power_g0]))
        self._log_norm = np.log(self._e[1]) + np.log(self._z[1])
        return self

    def _llr(self, X):
        e = (X[:, 0] * X[:, 1])[:, None]
        z = X[:, 1][:, None]
        (em, es), (zm, zs) = self._e, self._z
        ie = 1.0 / (2.0 * es * es)
        iz = 1.0 / (2.0 * zs * zs)
        e_star = shifted_mean(e, em, es, self.shift)
        z_star = shifted_mean(z, zm, zs, self.shift)
        num = -((e - e_star) ** 2) * ie - ((z - z_star) ** 2) * iz - self._log_norm
        den = -((e - em) ** 2) * ie - ((z - zm) ** 2) * iz - self._log_norm
        return (num.max(axis=1) - den.max(axis=1))[:, None]

    def cluster_means(self) -> np.ndarray:
        """``(m, 2)`` array of per-cluster (energy mean, power mean)."""
        self._check_fitted()
        return np.column_stack([self._e[0], self._z[0]])
