"""Resampling and low-pass conditioning of the anteroposterior channel."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .exceptions import (
    DegenerateInputError,
    FilterSpecError,
    IrregularSamplingError,
    SignalLengthError,
)
from .signal_io import AccelSeries

logger = logging.getLogger(__name__)

ALLOWED_ORDERS = (2, 4, 6, 8)


@dataclass(frozen=True)
class FilterSpec:
    """Butterworth low-pass settings.

    Defaults keep the 0.5-3.5 Hz step band while removing impact transients.
    """

    cutoff_hz: float = 3.0
    order: int = 4
    zero_phase: bool = True

    def __post_init__(self):
        if not self.cutoff_hz > 0:
            raise FilterSpecError(f"cutoff_hz must be positive, got {self.cutoff_hz}")
        if self.order not in ALLOWED_ORDERS:
            raise FilterSpecError(f"order must be one of {ALLOWED_ORDERS}, got {self.order}")

    @property
    def padlen(self) -> int:
        return 3 * self.order

    def check_rate(self, rate_hz: float) -> None:
        if self.cutoff_hz >= rate_hz / 2.0:
            raise FilterSpecError(
                f"cutoff {self.cutoff_hz} Hz is not below Nyquist ({rate_hz / 2.0} Hz)"
            )

    def sos(self, rate_hz: float) -> np.ndarray:
        self.check_rate(rate_hz)
        return signal.butter(self.order, self.cutoff_hz, btype="low", output="sos", fs=rate_hz)

    def ba(self, rate_hz: float) -> tuple[np.ndarray, np.ndarray]:
        self.check_rate(rate_hz)
        return signal.butter(self.order, self.cutoff_hz, btype="low", output="ba", fs=rate_hz)


@dataclass(frozen=True, eq=False)
class FilteredSeries:
    t: np.ndarray
    v: np.ndarray
    spec: FilterSpec
    source_len: int
    rate_hz: float

    def __len__(self) -> int:
        return int(self.v.size)


def resample_uniform(series: AccelSeries, rate_hz: float | None = None) -> AccelSeries:
    """Linearly interpolate all channels onto ``t0 + k / rate_hz``.

    The grid stops at the last point not beyond the final input timestamp, so
    a trailing partial interval is dropped.
    """
    rate_hz = series.nominal_rate_hz if rate_hz is None else float(rate_hz)
    if len(series) < 2:
        raise SignalLengthError("resampling needs at least 2 samples")
    if not rate_hz > 0:
        raise DegenerateInputError(f"rate_hz must be positive, got {rate_hz}")
    t = series.t
    if np.any(np.diff(t) <= 0):
        raise DegenerateInputError("duplicate or decreasing timestamps")
    span = t[-1] - t[0]
    # tolerate float fuzz so that an exact multiple of the period keeps its last sample
    n = int(np.floor(span * rate_hz + 1e-9)) + 1
    grid = t[0] + np.arange(n) / rate_hz
    grid[-1] = min(grid[-1], t[-1])
    out = AccelSeries(
        grid,
        np.interp(grid, t, series.x),
        np.interp(grid, t, series.y),
        np.interp(grid, t, series.z),
        nominal_rate_hz=rate_hz,
    )
    logger.info("resampled %d samples to %d at %.3f Hz", len(series), n, rate_hz)
    return out


def odd_extend(v: np.ndarray, n: int) -> np.ndarray:
    """Point-reflect ``n`` samples about each endpoint."""
    if n < 1:
        return v.copy()
    left = 2 * v[0] - v[n:0:-1]
    right = 2 * v[-1] - v[-2:-n - 2:-1]
    return np.concatenate([left, v, right])


def butter_filter(v, rate_hz: float, spec: FilterSpec = FilterSpec()) -> np.ndarray:
    """Low-pass ``v`` with the Butterworth filter described by ``spec``.

    Zero-phase mode runs the filter forward then backward. The signal is
    extended at both ends by odd reflection of length ``3 * order`` and the
    filter state starts in steady state for the first padded value, so
    constants pass through unchanged.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise SignalLengthError("expected a 1-D signal")
    if v.size <= spec.padlen:
        raise SignalLengthError(
            f"signal of {v.size} samples too short for order {spec.order} (need > {spec.padlen})"
        )
    sos = spec.sos(rate_hz)
    if spec.zero_phase:
        return signal.sosfiltfilt(sos, v, padtype="odd", padlen=spec.padlen)
    ext = odd_extend(v, spec.padlen)
    zi = signal.sosfilt_zi(sos) * ext[0]
    y, _ = signal.sosfilt(sos, ext, zi=zi)
    return y[spec.padlen:-spec.padlen]


def lowpass(series: AccelSeries, spec: FilterSpec = FilterSpec()) -> FilteredSeries:
    """Filter the anteroposterior channel of a uniformly sampled series."""
    if series.is_irregular:
        raise IrregularSamplingError(
            "series is irregularly sampled; call resample_uniform() first"
        )
    v = butter_filter(series.ap, series.nominal_rate_hz, spec)
    if not np.all(np.isfinite(v)):
        raise DegenerateInputError("filter produced non-finite output")
    v.setflags(write=False)
    return FilteredSeries(series.t, v, spec, len(series), series.nominal_rate_hz)
