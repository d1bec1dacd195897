"""Input coercion shared by the estimator classes."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .signal_io import DEFAULT_RATE_HZ, AccelSeries


def as_series(obj, rate_hz: float = DEFAULT_RATE_HZ) -> AccelSeries:
    """Accept an :class:`AccelSeries`, an ``(n, 4)`` array of ``t, x, y, z``,
    or a 1-D anteroposterior array sampled at ``rate_hz``."""
    if isinstance(obj, AccelSeries):
        return obj
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == 1:
        arr = check_array(arr.reshape(-1, 1), ensure_min_samples=2).ravel()
        t = np.arange(arr.size) / rate_hz
        zeros = np.zeros_like(arr)
        return AccelSeries(t, zeros, zeros, arr, nominal_rate_hz=rate_hz)
    arr = check_array(arr, ensure_min_samples=2)
    if arr.shape[1] != 4:
        raise ValueError(f"expected columns t, x, y, z; got {arr.shape[1]} columns")
    return AccelSeries(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], nominal_rate_hz=rate_hz)


def as_series_list(X, rate_hz: float = DEFAULT_RATE_HZ) -> list[AccelSeries]:
    if isinstance(X, (AccelSeries, np.ndarray)) and not (isinstance(X, np.ndarray) and X.dtype == object):
        raise TypeError("X must be a sequence of traces, not a single trace")
    out = [as_series(x, rate_hz) for x in X]
    if not out:
        raise ValueError("X contains no traces")
    return out


def check_peaks(X) -> np.ndarray:
    """Peak accelerations as an ``(n, 1)`` float array, all positive."""
    X = check_array(X, ensure_2d=False)
    X = X.reshape(-1, 1) if X.ndim == 1 else X
    if X.shape[1] != 1:
        raise ValueError(f"expected a single feature (peak acceleration), got {X.shape[1]}")
    if np.any(X <= 0):
        raise ValueError("peak accelerations must be positive")
    return X
