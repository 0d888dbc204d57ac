"""Input validation shared by the estimators."""
from __future__ import annotations

import numpy as np
from sklearn.utils import check_array

from .core import LabeledSeries, ShipmentSeries


def check_shipments(X, min_samples: int = 0) -> np.ndarray:
    """Return an ``(n, 2)`` float array of ``[duration, power]`` rows.

    Accepts a :class:`ShipmentSeries`, a :class:`LabeledSeries` or anything
    array-like with two columns. Durations and powers must be positive.
    """
    if isinstance(X, LabeledSeries):
        X = X.series
    if isinstance(X, ShipmentSeries):
        X = X.to_array()
    X = check_array(X, dtype=np.float64, ensure_min_samples=0, ensure_all_finite=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected 2 columns (duration, power), got {X.shape[1]}")
    if X.shape[0] < min_samples:
        raise ValueError(f"need at least {min_samples} shipments, got {X.shape[0]}")
    if X.size and not (X > 0).all():
        row = int(np.argmax(~(X > 0).all(axis=1)))
        raise ValueError(f"shipment {row + 1}: duration and power must be positive")
    return X
