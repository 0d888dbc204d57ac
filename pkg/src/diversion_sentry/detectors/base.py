"""Shared detector machinery: mean-shift likelihood ratio, CUSUM recursion, streaming state."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal, Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..core import DiversionSentryError, ShipmentObservation
from ..validation import check_shipments

Verdict = Literal["continue", "alarm"]


class TrainingError(DiversionSentryError, ValueError):
    """Training data unsuitable for the requested detector."""


@dataclass(frozen=True)
class ShiftSpec:
    """Feasible post-change mean shifts ``[lower_mult, upper_mult]`` in units of sigma."""

    lower_mult: float = 0.5
    upper_mult: float = 3.0

    def __post_init__(self):
        if not 0.0 <= self.lower_mult <= self.upper_mult:
            raise ValueError(f"need 0 <= lower_mult <= upper_mult, got ({self.lower_mult}, {self.upper_mult})")
        object.__setattr__(self, "lower_mult", float(self.lower_mult))
        object.__setattr__(self, "upper_mult", float(self.upper_mult))


def cusum_step(s: float, llr: float) -> float:
    """One step of the clamped CUSUM recursion ``max(0, s + llr)``."""
    v = s + llr
    return v if v > 0.0 else 0.0


def shifted_mean(x, mean, std, shift: ShiftSpec):
    """Maximum-likelihood post-change mean: ``x`` clamped to ``[mean + a std, mean + b std]``."""
    return np.clip(x, mean + shift.lower_mult * std, mean + shift.upper_mult * std)


def glr_shift_llr(x, g0, shift: ShiftSpec):
    """Log-ratio of the best feasible shifted Gaussian to the pre-change one at ``x``."""
    mu, sigma = g0.mean, g0.std
    mu_star = shifted_mean(x, mu, sigma, shift)
    return ((x - mu) ** 2 - (x - mu_star) ** 2) / (2.0 * sigma * sigma)


def max_component_llr(x, means, stds, log_stds, shift: ShiftSpec):
    """``max_k log N(x; mu*_k, s_k) - max_k log N(x; mu_k, s_k)`` for 1-D ``x``.

    Component weights are deliberately ignored; each component's shifted mean
    is its own clamped maximum-likelihood value.
    """
    x = x[:, None]
    mu_star = shifted_mean(x, means, stds, shift)
    inv = 1.0 / (2.0 * stds * stds)
    num = -((x - mu_star) ** 2) * inv - log_stds
    den = -((x - means) ** 2) * inv - log_stds
    return num.max(axis=1) - den.max(axis=1)


@dataclass(frozen=True)
class DetectorState:
    """Streaming state. ``stats`` holds one entry per parallel statistic."""

    t: int = 0
    stats: tuple = ()
    alarm_time: Optional[int] = None
    buffer: tuple = field(default=(), repr=False)

    @property
    def alarmed(self) -> bool:
        return self.alarm_time is not None


def first_crossings(stat: np.ndarray, thresholds) -> list[Optional[int]]:
    """1-based first index with ``stat >= threshold`` for each threshold (``None`` if never).

    NaN entries (warm-up) never cross.
    """
    thresholds = np.atleast_1d(np.asarray(thresholds, dtype=float))
    if stat.size == 0:
        return [None] * thresholds.size
    running = np.maximum.accumulate(np.where(np.isnan(stat), -np.inf, stat))
    idx = np.searchsorted(running, thresholds, side="left")
    return [int(i) + 1 if i < stat.size else None for i in idx]


class BaseDetector(BaseEstimator):
    """Sequential change detector with a scikit-learn style interface.

    ``fit`` learns the pre-change model from diversion-free shipments.
    ``decision_function`` returns the alarm statistic after each shipment and
    ``predict`` flags shipments at or after the first alarm.
    """

    kind: str = ""
    n_streams: int = 2

    def _check_fitted(self):
        check_is_fitted(self, self._fitted_attr)

    def decision_function(self, X) -> np.ndarray:
        """Alarm statistic after each shipment (max over parallel statistics)."""
        path = self.statistic_path(X)
        if path.shape[0] == 0:
            return np.empty(0)
        return np.max(path, axis=1)

    def alarm_times(self, X, thresholds) -> list[Optional[int]]:
        return first_crossings(self.decision_function(X), thresholds)

    def alarm_time(self, X, threshold: Optional[float] = None) -> Optional[int]:
        """First 1-based shipment index at which the detector alarms, or ``None``."""
        return self.alarm_times(X, self.threshold if threshold is None else threshold)[0]

    def predict(self, X) -> np.ndarray:
        X = check_shipments(X)
        out = np.zeros(len(X), dtype=bool)
        t = self.alarm_time(X)
        if t is not None:
            out[t - 1:] = True
        return out

    def run(self, X, threshold: Optional[float] = None) -> DetectorState:
        """Feed a whole stream through :meth:`step` and return the final state."""
        state = self.init_state()
        for row in check_shipments(X):
            state, _ = self.step(state, row, threshold)
            if state.alarmed:
                break
        return state

    def init_state(self) -> DetectorState:
        raise NotImplementedError

    def step(self, state: DetectorState, obs, threshold: Optional[float] = None) -> tuple[DetectorState, Verdict]:
        raise NotImplementedError


class CusumDetector(BaseDetector):
    """CUSUM-family detector: parallel clamped CUSUMs over per-shipment log-ratios."""

    def llr(self, X) -> np.ndarray:
        """Per-shipment log-likelihood ratios, shape ``(n, n_streams)``."""
        self._check_fitted()
        return self._llr(check_shipments(X))

    def statistic_path(self, X) -> np.ndarray:
        inc = self.llr(X)
        out = np.empty_like(inc)
        for j in range(inc.shape[1]):
            s = 0.0
            col = inc[:, j].tolist()
            dst = out[:, j]
            for i, v in enumerate(col):
                s = cusum_step(s, v)
                dst[i] = s
        return out

    def init_state(self) -> DetectorState:
        self._check_fitted()
        return DetectorState(0, (0.0,) * self.n_streams)

    def step(self, state, obs, threshold=None):
        if state.alarmed:
            return state, "alarm"
        if isinstance(obs, ShipmentObservation):
            obs = (obs.duration_days, obs.power)
        inc = self._llr(np.asarray(obs, dtype=float).reshape(1, 2))[0].tolist()
        stats = tuple(cusum_step(s, v) for s, v in zip(state.stats, inc))
        t = state.t + 1
        rho = self.threshold if threshold is None else threshold
        if max(stats) >= rho:
            return replace(state, t=t, stats=stats, alarm_time=t), "alarm"
        return replace(state, t=t, stats=stats), "continue"
