"""Distance, average step length, cadence and speed for one activity."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .calibration import CalibrationModel, predict_step_length
from .exceptions import DegenerateDurationError, UndefinedAverageError
from .signal_io import Activity, ActivityRecord
from .step_detect import StepSegment, step_durations

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DistanceEstimate:
    distance_m: float
    step_lengths_m: tuple[float, ...]
    extrapolated: tuple[bool, ...] = ()
    empty: bool = False

    def __iter__(self):
        # unpacks as (distance_m, step_lengths_m)
        return iter((self.distance_m, self.step_lengths_m))

    @property
    def extrapolated_fraction(self) -> float:
        return float(np.mean(self.extrapolated)) if self.extrapolated else 0.0


@dataclass(frozen=True)
class Rates:
    cadence_steps_per_min: float
    speed_m_per_s: float
    avg_step_duration_s: float
    active_duration_s: float


@dataclass(frozen=True)
class ActivityEstimate:
    activity: Activity
    step_count: int
    distance_m: Optional[float]
    avg_step_length_m: Optional[float]
    avg_step_duration_s: Optional[float]
    cadence_steps_per_min: Optional[float]
    speed_m_per_s: Optional[float]
    extrapolated_step_fraction: Optional[float]


@dataclass(frozen=True)
class ActivityResult:
    """An estimate together with the ground truth and pedometer values it is judged against."""

    subject_id: str
    cohort: Optional[str]
    activity: Activity
    estimate: ActivityEstimate
    observed_steps: Optional[int] = None
    observed_distance_m: Optional[float] = None
    observed_duration_s: Optional[float] = None
    pedometer_steps: Optional[int] = None
    pedometer_distance_m: Optional[float] = None
    step_lengths_m: tuple[float, ...] = field(default=(), compare=False, repr=False)

    @classmethod
    def from_record(cls, record: ActivityRecord, estimate: ActivityEstimate,
                    step_lengths_m: Sequence[float] = ()) -> "ActivityResult":
        return cls(
            subject_id=record.subject_id,
            cohort=record.cohort,
            activity=record.activity,
            estimate=estimate,
            observed_steps=record.observed_steps,
            observed_distance_m=record.observed_distance_m,
            observed_duration_s=record.observed_duration_s,
            pedometer_steps=record.pedometer_steps,
            pedometer_distance_m=record.pedometer_distance_m,
            step_lengths_m=tuple(step_lengths_m),
        )


def estimate_distance(model: CalibrationModel, segments: Sequence[StepSegment]) -> DistanceEstimate:
    """Sum of per-step lengths predicted from each step's IC peak."""
    if not segments:
        logger.warning("no steps detected; distance set to 0")
        return DistanceEstimate(0.0, (), (), empty=True)
    preds = [predict_step_length(model, s.ic_peak_g) for s in segments]
    lengths = tuple(p.length_m for p in preds)
    return DistanceEstimate(float(sum(lengths)), lengths, tuple(p.extrapolated for p in preds))


def average_step_length(distance_m: float, step_count: int) -> float:
    if step_count < 1:
        raise UndefinedAverageError("average step length undefined for zero steps")
    return distance_m / step_count


def derive_rates(segments: Sequence[StepSegment], distance_m: float, t) -> Rates:
    """Cadence (steps/min), speed and mean step duration over the active span.

    The active span runs from the first window start to the last window end,
    so standing still before or after the walk is not counted.
    """
    if not segments:
        raise DegenerateDurationError("no steps, active duration undefined")
    t = np.asarray(t, dtype=float)
    duration = float(t[segments[-1].end_idx] - t[segments[0].start_idx])
    if not duration > 0:
        raise DegenerateDurationError(f"active duration {duration} s is not positive")
    n = len(segments)
    return Rates(
        cadence_steps_per_min=60.0 * n / duration,
        speed_m_per_s=distance_m / duration,
        avg_step_duration_s=float(np.mean(step_durations(segments, t))),
        active_duration_s=duration,
    )


def estimate_activity(model: CalibrationModel, segments: Sequence[StepSegment], t,
                      activity: Activity) -> tuple[ActivityEstimate, DistanceEstimate]:
    dist = estimate_distance(model, segments)
    n = len(segments)
    if n == 0:
        est = ActivityEstimate(activity, 0, 0.0, None, None, None, None, None)
        return est, dist
    try:
        rates = derive_rates(segments, dist.distance_m, t)
    except DegenerateDurationError:
        logger.warning("%s: degenerate active duration; rates left undefined", activity)
        rates = None
    est = ActivityEstimate(
        activity=activity,
        step_count=n,
        distance_m=dist.distance_m,
        avg_step_length_m=average_step_length(dist.distance_m, n),
        avg_step_duration_s=rates.avg_step_duration_s if rates else None,
        cadence_steps_per_min=rates.cadence_steps_per_min if rates else None,
        speed_m_per_s=rates.speed_m_per_s if rates else None,
        extrapolated_step_fraction=dist.extrapolated_fraction,
    )
    return est, dist
