"""One-dimensional Gaussian mixtures fitted by EM, with BIC order selection."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from ..core import as_rng_stream
from .clustering import ClusteringError, kmeans
from .gaussian import LOG_SQRT_2PI, EstimationError, GaussianParams


@dataclass(frozen=True)
class GaussianMixture:
    weights: tuple
    components: tuple
    log_likelihood: float = float("nan")
    n_iter: int = 0
    log_likelihood_history: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        comps = tuple(c if isinstance(c, GaussianParams) else GaussianParams(**c) for c in self.components)
        if len(w) != len(comps) or not w:
            raise EstimationError("a mixture needs one weight per component")
        if min(w) < 0 or abs(sum(w) - 1.0) > 1e-9:
            raise EstimationError(f"mixture weights must be nonnegative and sum to 1, got {w}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def means(self) -> np.ndarray:
        return np.array([c.mean for c in self.components])

    @property
    def stds(self) -> np.ndarray:
        return np.array([c.std for c in self.components])

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        comp = _component_logpdf(x.reshape(-1), self.means, self.stds) + np.log(self.weights)
        return logsumexp(comp, axis=1).reshape(x.shape)

    def n_parameters(self) -> int:
        return 3 * self.k - 1

    def bic(self, samples) -> float:
        x = np.asarray(samples, dtype=float).reshape(-1)
        ll = float(self.logpdf(x).sum())
        return -2.0 * ll + self.n_parameters() * math.log(x.size)


def _component_logpdf(x, means, stds):
    z = (x[:, None] - means[None, :]) / stds[None, :]
    return -0.5 * z * z - np.log(stds)[None, :] - LOG_SQRT_2PI


def fit_gmm(samples, k: int, rng=None, tol: float = 1e-8, max_iter: int = 500) -> GaussianMixture:
    """EM from hard k-means responsibilities.

    Variances are the responsibility-weighted population form, so with
    ``k=1`` the std is ``sqrt((n-1)/n)`` times :func:`fit_gaussian`'s.
    """
    x = np.asarray(samples, dtype=float).reshape(-1)
    if k < 1:
        raise EstimationError("k must be at least 1")
    if x.size < 2 * k:
        raise EstimationError(f"need at least {2 * k} samples for {k} components, got {x.size}")
    span = float(x.max() - x.min())
    if not span > 0:
        raise EstimationError("samples have zero variance")
    floor = 1e-9 * span
    try:
        init = kmeans(x, k, as_rng_stream(rng))
    except ClusteringError as exc:
        raise EstimationError(str(exc)) from None
    resp = np.eye(k)[init.labels - 1]

    history = []
    ll_old = -np.inf
    it = 0
    for it in range(1, max_iter + 1):
        nk = resp.sum(axis=0) + 10 * np.finfo(float).eps
        weights = nk / nk.sum()
        means = resp.T @ x / nk
        var = (resp * (x[:, None] - means[None, :]) ** 2).sum(axis=0) / nk
        stds = np.maximum(np.sqrt(var), floor)
        logp = _component_logpdf(x, means, stds) + np.log(weights)[None, :]
        norm = logsumexp(logp, axis=1)
        ll = float(norm.sum())
        history.append(ll)
        resp = np.exp(logp - norm[:, None])
        if np.isfinite(ll_old) and abs(ll - ll_old) < tol * abs(ll_old):
            break
        ll_old = ll
    weights = weights / weights.sum()
    return GaussianMixture(
        tuple(weights),
        tuple(GaussianParams(m, s) for m, s in zip(means, stds)),
        log_likelihood=history[-1],
        n_iter=it,
        log_likelihood_history=tuple(history),
    )


def select_gmm_bic(samples, k_max: int = 8, rng=None) -> tuple[GaussianMixture, list[float]]:
    """Fit k = 1..k_max and keep the minimum-BIC mixture (ties to smaller k)."""
    rng = as_rng_stream(rng)
    x = np.asarray(samples, dtype=float).reshape(-1)
    best, scores = None, []
    for k in range(1, k_max + 1):
        try:
            gm = fit_gmm(x, k, rng.substream(k))
        except EstimationError:
            if k == 1:
                raise
            break
        b = -2.0 * gm.log_likelihood + gm.n_parameters() * math.log(x.size)
        scores.append(b)
        if best is None or b < best[1]:
            best = (gm, b)
    return best[0], scores
