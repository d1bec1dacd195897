"""Step counting, step windows and initial-contact / toe-off events.

The filtered anteroposterior signal has one peak per step. Windows between
steps are cut at the midpoints of consecutive filtered peaks (taken as
toe-off); inside each window the highest local maximum of the *raw* signal
marks initial contact.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import DegenerateInputError
from .preprocess import FilteredSeries
from .signal_io import EventRow


@dataclass(frozen=True)
class PeakParams:
    min_separation_s: float = 0.25
    min_prominence_g: float = 0.05

    def __post_init__(self):
        if not self.min_separation_s > 0:
            raise ValueError(f"min_separation_s must be positive, got {self.min_separation_s}")
        if not self.min_prominence_g >= 0:
            raise ValueError(f"min_prominence_g must be >= 0, got {self.min_prominence_g}")

    def separation_samples(self, rate_hz: float) -> int:
        n = int(np.ceil(self.min_separation_s * rate_hz - 1e-9))
        if n < 2:
            raise ValueError(
                f"min_separation_s={self.min_separation_s} is below 2 samples at {rate_hz} Hz"
            )
        return n


@dataclass(frozen=True)
class StepSegment:
    index: int
    start_idx: int
    end_idx: int
    filtered_peak_idx: int
    to_idx: int
    ic_idx: int
    ic_peak_g: float
    duration_s: float
    degraded: bool = False


class EventKind(str, enum.Enum):
    IC = "IC"
    TO = "TO"


@dataclass(frozen=True)
class GaitEvent:
    kind: EventKind
    t: float
    sample_idx: int
    amplitude_g: float
    # toe-off sits at the inter-peak midpoint by observation only
    low_confidence: bool = False


def strict_local_maxima(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.size < 3:
        return np.empty(0, dtype=int)
    mid = v[1:-1]
    return np.flatnonzero((mid > v[:-2]) & (mid > v[2:])) + 1


def peak_prominences(v: np.ndarray, peaks: np.ndarray) -> np.ndarray:
    """Topographic prominence of each peak index in ``peaks``.

    From each peak walk outward until a strictly higher sample (or the signal
    edge); the prominence is the peak height above the higher of the two
    minima found on those walks.
    """
    v = np.asarray(v, dtype=float)
    out = np.empty(len(peaks))
    for k, p in enumerate(peaks):
        h = v[p]
        higher_left = np.flatnonzero(v[:p] > h)
        lo = higher_left[-1] + 1 if higher_left.size else 0
        higher_right = np.flatnonzero(v[p + 1:] > h)
        hi = p + 1 + higher_right[0] if higher_right.size else v.size
        left_min = v[lo:p + 1].min()
        right_min = v[p:hi].min()
        out[k] = h - max(left_min, right_min)
    return out


def select_by_separation(v: np.ndarray, peaks: np.ndarray, min_distance: int) -> np.ndarray:
    """Greedy thinning: visit peaks highest first (ties: earliest) and drop
    every remaining peak closer than ``min_distance`` samples."""
    peaks = np.asarray(peaks, dtype=int)
    if peaks.size < 2:
        return peaks
    order = np.lexsort((peaks, -v[peaks]))
    keep = np.ones(peaks.size, dtype=bool)
    for i in order:
        if not keep[i]:
            continue
        close = np.abs(peaks - peaks[i]) < min_distance
        close[i] = False
        keep &= ~close
    return peaks[keep]


def find_peaks(filtered: FilteredSeries, params: PeakParams = PeakParams()) -> list[int]:
    """Indices of step peaks in the filtered signal, ascending."""
    return find_peaks_array(filtered.v, filtered.rate_hz, params)


def find_peaks_array(v, rate_hz: float, params: PeakParams = PeakParams()) -> list[int]:
    v = np.asarray(v, dtype=float)
    candidates = strict_local_maxima(v)
    if candidates.size == 0:
        return []
    prom = peak_prominences(v, candidates)
    candidates = candidates[prom >= params.min_prominence_g]
    kept = select_by_separation(v, candidates, params.separation_samples(rate_hz))
    return [int(i) for i in np.sort(kept)]


def count_steps(filtered: FilteredSeries, params: PeakParams = PeakParams()) -> int:
    return len(find_peaks(filtered, params))


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def segment_steps(filtered, peaks: Sequence[int]) -> list[tuple[int, int]]:
    """Step windows ``(start_idx, end_idx)`` around each peak.

    Interior boundaries are ``floor((p[i] + p[i+1]) / 2)``. The outer
    boundaries extend half the median inter-peak gap beyond the first and
    last peak, clamped to the series. A lone peak gets the whole series.
    Consecutive windows share their boundary sample.
    """
    n = filtered if isinstance(filtered, (int, np.integer)) else len(filtered)
    peaks = [int(p) for p in peaks]
    if not peaks:
        return []
    if any(b <= a for a, b in zip(peaks, peaks[1:])):
        raise DegenerateInputError("peaks must be strictly increasing")
    if len(peaks) == 1:
        return [(0, n - 1)]
    half = _round_half_up(float(np.median(np.diff(peaks))) / 2.0)
    bounds = [max(0, peaks[0] - half)]
    bounds += [(a + b) // 2 for a, b in zip(peaks, peaks[1:])]
    bounds.append(min(n - 1, peaks[-1] + half))
    return list(zip(bounds[:-1], bounds[1:]))


def detect_ic(raw_ap, windows: Sequence[tuple[int, int]], t=None, rate_hz: float = 100.0,
              filtered_peaks: Sequence[int] | None = None) -> list[StepSegment]:
    """Locate initial contact in each window of the raw anteroposterior signal.

    Within a window the raw strict local maxima are candidates and the
    highest wins (ties: earliest). A window owns ``[start, end)``; the last
    window also owns its end sample. Windows with no candidate fall back to
    their plain argmax and are marked ``degraded``.
    """
    raw = np.asarray(raw_ap, dtype=float)
    if not windows:
        return []
    if t is None:
        t = np.arange(raw.size) / rate_hz
    t = np.asarray(t, dtype=float)
    is_max = np.zeros(raw.size, dtype=bool)
    is_max[strict_local_maxima(raw)] = True

    ic = []
    flags = []
    last = len(windows) - 1
    for k, (start, end) in enumerate(windows):
        stop = end + 1 if k == last else end
        stop = max(stop, start + 1)
        seg = raw[start:stop]
        cand = np.flatnonzero(is_max[start:stop])
        if cand.size:
            best = cand[np.argmax(seg[cand])]
            flags.append(False)
        else:
            best = int(np.argmax(seg))
            flags.append(True)
        ic.append(start + int(best))

    segments = []
    for k, ((start, end), i) in enumerate(zip(windows, ic)):
        if k < last:
            duration = t[ic[k + 1]] - t[i]
        else:
            duration = t[end] - t[i]
        segments.append(StepSegment(
            index=k,
            start_idx=int(start),
            end_idx=int(end),
            filtered_peak_idx=int(filtered_peaks[k]) if filtered_peaks is not None else -1,
            to_idx=int(start),
            ic_idx=int(i),
            ic_peak_g=float(raw[i]),
            duration_s=float(duration),
            degraded=flags[k],
        ))
    return segments


def step_durations(segments: Sequence[StepSegment], t) -> list[float]:
    """IC-to-IC durations; the last step runs from its IC to its window end."""
    t = np.asarray(t, dtype=float)
    out = []
    for k, seg in enumerate(segments):
        if k + 1 < len(segments):
            out.append(float(t[segments[k + 1].ic_idx] - t[seg.ic_idx]))
        else:
            out.append(float(t[seg.end_idx] - t[seg.ic_idx]))
    return out


def gait_events(segments: Sequence[StepSegment], t, raw_ap) -> list[GaitEvent]:
    """Alternating TO/IC events, TO first for every step."""
    t = np.asarray(t, dtype=float)
    raw = np.asarray(raw_ap, dtype=float)
    events = []
    for seg in segments:
        events.append(GaitEvent(EventKind.TO, float(t[seg.to_idx]), seg.to_idx,
                                float(raw[seg.to_idx]), low_confidence=True))
        events.append(GaitEvent(EventKind.IC, float(t[seg.ic_idx]), seg.ic_idx, seg.ic_peak_g))
    return events


def event_rows(segments: Sequence[StepSegment], t, step_lengths=None) -> list[EventRow]:
    t = np.asarray(t, dtype=float)
    if step_lengths is None:
        step_lengths = [None] * len(segments)
    return [
        EventRow(
            step_index=seg.index,
            start_t=float(t[seg.start_idx]),
            to_t=float(t[seg.to_idx]),
            ic_t=float(t[seg.ic_idx]),
            end_t=float(t[seg.end_idx]),
            ic_peak_g=seg.ic_peak_g,
            step_length_m=None if length is None else float(length),
        )
        for seg, length in zip(segments, step_lengths)
    ]


@dataclass(frozen=True, eq=False)
class Detection:
    """Everything the detector produced for one activity."""

    filtered: FilteredSeries
    raw_ap: np.ndarray
    peaks: list[int]
    segments: list[StepSegment]

    @property
    def t(self) -> np.ndarray:
        return self.filtered.t

    @property
    def step_count(self) -> int:
        return len(self.segments)

    @property
    def events(self) -> list[GaitEvent]:
        return gait_events(self.segments, self.t, self.raw_ap)

    def event_rows(self, step_lengths=None) -> list[EventRow]:
        return event_rows(self.segments, self.t, step_lengths)


def detect_steps(filtered: FilteredSeries, raw_ap, params: PeakParams = PeakParams()) -> Detection:
    """Peaks, windows and IC localisation in one call."""
    raw = np.asarray(raw_ap, dtype=float)
    if raw.size != len(filtered):
        raise DegenerateInputError("raw and filtered signals differ in length")
    peaks = find_peaks(filtered, params)
    windows = segment_steps(filtered, peaks)
    segments = detect_ic(raw, windows, filtered.t, filtered.rate_hz, peaks)
    return Detection(filtered, raw, peaks, segments)
