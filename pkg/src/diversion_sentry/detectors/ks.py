"""Sliding-window Kolmogorov-Smirnov detector with Gaussian-kernel CDFs."""
from __future__ import annotations

from dataclasses import replace
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import ndtr

from ..core import ShipmentObservation
from ..stats import KernelCdf, kernel_cdf_eval, ks_distance
from ..validation import check_shipments
from .base import BaseDetector, DetectorState, TrainingError

_WORK = 1 << 22  # elements per vectorized block


def _window_bandwidths(windows: np.ndarray) -> np.ndarray:
    n = windows.shape[1]
    h = 1.06 * np.std(windows, axis=1, ddof=1) * n ** -0.2
    return np.where(h > 0, h, np.finfo(float).tiny)


class KSDetector(BaseDetector):
    """Alarm when a window's kernel CDF drifts from the training baseline.

    For every shipment ``t >= window`` the last ``window`` durations and
    powers get their own kernel CDFs (Silverman bandwidth). The sup distances
    to the duration and power baselines are ``D_t`` and ``E_t``; the detector
    alarms at the first ``t`` with ``max(D_t, E_t) >= threshold``.

    Parameters
    ----------
    window : int
        Window length, at least 2.
    threshold : float
        Alarm level in [0, 1].
    grid_size : int or None
        The sup is taken over ``grid_size`` evenly spaced points covering the
        baseline support (+-10 bandwidths) plus the window's own points.
        ``None`` uses :func:`ks_distance`'s full candidate set, which is
        exact to the same tolerance but far slower.

    Attributes
    ----------
    baseline_duration_, baseline_power_ : KernelCdf
    """

    kind = "ks"
    _fitted_attr = "baseline_duration_"

    def __init__(self, window: int = 50, threshold: float = 0.3, grid_size: Optional[int] = 128):
        self.window = window
        self.threshold = threshold
        self.grid_size = grid_size

    def fit(self, X, y=None):
        if self.window < 2:
            raise TrainingError(f"window must be at least 2, got {self.window}")
        X = check_shipments(X)
        need = max(self.window, 10)
        if len(X) < need:
            raise TrainingError(f"KS needs at least {need} training shipments, got {len(X)}")
        return self._set_baselines(KernelCdf.fit(X[:, 0]), KernelCdf.fit(X[:, 1]))

    def _set_baselines(self, duration: KernelCdf, power: KernelCdf):
        self.baseline_duration_ = duration
        self.baseline_power_ = power
        self._grids = []
        if self.grid_size is not None:
            for cdf in (duration, power):
                pts, h = cdf.sample_points, cdf.bandwidth
                grid = np.linspace(pts[0] - 10 * h, pts[-1] + 10 * h, int(self.grid_size))
                self._grids.append((grid, kernel_cdf_eval(cdf, grid)))
        return self

    def _baselines(self):
        return (self.baseline_duration_, self.baseline_power_)

    def _distances(self, j: int, windows: np.ndarray, base_at_points: np.ndarray) -> np.ndarray:
        """Sup distance for each row of ``windows`` against baseline ``j``.

        ``base_at_points`` holds the baseline CDF at each window entry.
        """
        if self.grid_size is None:
            base = self._baselines()[j]
            return np.array([ks_distance(KernelCdf(w, h), base) for w, h in zip(windows, _window_bandwidths(windows))])
        # contiguous rows keep reductions identical between batch and streaming calls
        windows = np.ascontiguousarray(windows)
        base_at_points = np.ascontiguousarray(base_at_points)
        grid, base_grid = self._grids[j]
        n, W = windows.shape
        out = np.empty(n)
        block = max(1, _WORK // (W * (grid.size + W)))
        for i in range(0, n, block):
            w = windows[i:i + block]
            h = _window_bandwidths(w)[:, None, None]
            z = (grid[None, :, None] - w[:, None, :]) / h
            on_grid = ndtr(z, out=z).mean(axis=2)
            z = (w[:, :, None] - w[:, None, :]) / h
            on_self = ndtr(z, out=z).mean(axis=2)
            d = np.maximum(
                np.abs(on_grid - base_grid[None, :]).max(axis=1),
                np.abs(on_self - base_at_points[i:i + block]).max(axis=1),
            )
            out[i:i + block] = d
        return np.minimum(out, 1.0)

    def statistic_path(self, X) -> np.ndarray:
        """``(n, 2)`` array of ``(D_t, E_t)``; NaN while fewer than ``window`` shipments are seen."""
        self._check_fitted()
        X = check_shipments(X)
        n, W = len(X), self.window
        out = np.full((n, 2), np.nan)
        if n < W:
            return out
        for j, base in enumerate(self._baselines()):
            windows = sliding_window_view(X[:, j], W)
            at_points = sliding_window_view(kernel_cdf_eval(base, X[:, j]), W)
            out[W - 1:, j] = self._distances(j, windows, at_points)
        return out

    def init_state(self) -> DetectorState:
        self._check_fitted()
        return DetectorState(0, (float("nan"), float("nan")), buffer=())

    def step(self, state, obs, threshold=None):
        if state.alarmed:
            return state, "alarm"
        if isinstance(obs, ShipmentObservation):
            obs = (obs.duration_days, obs.power)
        y, z = (float(v) for v in obs)
        # buffer rows: (duration, power, baseline F at duration, baseline G at power)
        row = (y, z, kernel_cdf_eval(self.baseline_duration_, y), kernel_cdf_eval(self.baseline_power_, z))
        buf = (state.buffer + (row,))[-self.window:]
        t = state.t + 1
        if len(buf) < self.window:
            return replace(state, t=t, buffer=buf), "continue"
        arr = np.array(buf)
        stats = tuple(
            float(self._distances(j, arr[None, :, j], arr[None, :, j + 2])[0]) for j in range(2)
        )
        rho = self.threshold if threshold is None else threshold
        if max(stats) >= rho:
            return replace(state, t=t, stats=stats, buffer=buf, alarm_time=t), "alarm"
        return replace(state, t=t, stats=stats, buffer=buf), "continue"
