"""Univariate Gaussian fits and log densities."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import DiversionSentryError

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class EstimationError(DiversionSentryError, ValueError):
    """Too little or degenerate data for a fit."""


@dataclass(frozen=True)
class GaussianParams:
    mean: float
    std: float

    def __post_init__(self):
        if not (self.std > 0 and math.isfinite(self.std)):
            raise EstimationError(f"std must be positive and finite, got {self.std}")
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "std", float(self.std))

    def logpdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / self.std
        return -0.5 * z * z - math.log(self.std) - LOG_SQRT_2PI


def _as_samples(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size < 2:
        raise EstimationError(f"need at least 2 samples, got {x.size}")
    if not np.isfinite(x).all():
        raise EstimationError("samples contain non-finite values")
    return x


def sample_std(samples) -> float:
    x = _as_samples(samples)
    s = float(np.std(x, ddof=1))
    if not s > 0:
        raise EstimationError("samples have zero variance")
    return s


def fit_gaussian(samples) -> GaussianParams:
    """Sample mean and unbiased (n - 1) standard deviation."""
    x = _as_samples(samples)
    return GaussianParams(float(np.mean(x)), sample_std(x))
