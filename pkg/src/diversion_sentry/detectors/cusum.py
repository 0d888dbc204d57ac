"""Per-modality CUSUM detectors: single Gaussian (G-CUSUM) and Gaussian mixture (GM-CUSUM).

Both run two CUSUMs in parallel, one on shipment durations and one on power,
and alarm when either crosses the threshold.
"""
from __future__ import annotations

import numpy as np

from ..core import as_rng_stream
from ..stats import GaussianMixture, fit_gaussian, select_gmm_bic
from ..validation import check_shipments
from .base import CusumDetector, ShiftSpec, TrainingError, glr_shift_llr, max_component_llr


class GCusumDetector(CusumDetector):
    """Two CUSUMs against one Gaussian per modality, with a mean-shift alternative.

    Parameters
    ----------
    shift : ShiftSpec
        Feasible upward mean shifts, in units of each modality's std.
    threshold : float
        Alarm level for ``max(U_t, V_t)``.

    Attributes
    ----------
    duration_g0_, power_g0_ : GaussianParams
        Pre-change fits to training durations and powers.
    """

    kind = "g_cusum"
    _fitted_attr = "duration_g0_"

    def __init__(self, shift: ShiftSpec = ShiftSpec(), threshold: float = 10.0):
        self.shift = shift
        self.threshold = threshold

    def fit(self, X, y=None):
        X = check_shipments(X)
        if len(X) < 10:
            raise TrainingError(f"G-CUSUM needs at least 10 training shipments, got {len(X)}")
        self.duration_g0_ = fit_gaussian(X[:, 0])
        self.power_g0_ = fit_gaussian(X[:, 1])
        return self

    def _llr(self, X):
        return np.column_stack([
            glr_shift_llr(X[:, 0], self.duration_g0_, self.shift),
            glr_shift_llr(X[:, 1], self.power_g0_, self.shift),
        ])


class GMCusumDetector(CusumDetector):
    """Two CUSUMs against a Gaussian mixture per modality.

    Mixture orders are chosen by BIC over ``1..k_max``. The log-ratio compares
    the best shifted component with the best unshifted one, ignoring weights.
    """

    kind = "gm_cusum"
    _fitted_attr = "duration_mix_"

    def __init__(self, shift: ShiftSpec = ShiftSpec(), threshold: float = 10.0, k_max: int = 8, random_state=0):
        self.shift = shift
        self.threshold = threshold
        self.k_max = k_max
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_shipments(X)
        if len(X) < 2 * self.k_max:
            raise TrainingError(f"GM-CUSUM with k_max={self.k_max} needs at least {2 * self.k_max} shipments")
        rng = as_rng_stream(self.random_state)
        self.duration_mix_, self.duration_bic_ = select_gmm_bic(X[:, 0], self.k_max, rng.substream(0))
        self.power_mix_, self.power_bic_ = select_gmm_bic(X[:, 1], self.k_max, rng.substream(1))
        self._cache()
        return self

    def _cache(self):
        self._params = [
            (m.means, m.stds, np.log(m.stds)) for m in (self.duration_mix_, self.power_mix_)
        ]

    def _set_mixtures(self, duration_mix: GaussianMixture, power_mix: GaussianMixture):
        self.duration_mix_ = duration_mix
        self.power_mix_ = power_mix
        self._cache()
        return self

    def _llr(self, X):
        return np.column_stack([
            max_component_llr(X[:, j], *self._params[j], self.shift) for j in range(2)
        ])
