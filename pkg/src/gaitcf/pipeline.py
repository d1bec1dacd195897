"""Per-subject orchestration: trace -> steps -> calibration -> estimates -> gait maps."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .calibration import CalibrationModel, RegressionForm, build_points, fit
from .estimate import ActivityResult, estimate_activity
from .exceptions import EmptyInputError
from .gaitmap import ALL_ACTIVITIES, CompositeMap, composite, cycles_from_segments, merge_composites
from .preprocess import FilterSpec, lowpass, resample_uniform
from .signal_io import AccelSeries, Activity, ActivityRecord, EventRow
from .step_detect import Detection, PeakParams, detect_steps

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    filter_spec: FilterSpec = FilterSpec()
    peak_params: PeakParams = PeakParams()
    form: RegressionForm = RegressionForm.LINEAR


def detect_series(series: AccelSeries, config: PipelineConfig = PipelineConfig()) -> Detection:
    if series.is_irregular:
        logger.warning("irregular sampling (median %.4f s); resampling to %g Hz",
                       series.median_interval_s, series.nominal_rate_hz)
        series = resample_uniform(series)
    filtered = lowpass(series, config.filter_spec)
    return detect_steps(filtered, series.ap, config.peak_params)


def _loaded(records: Sequence[ActivityRecord]) -> list[ActivityRecord]:
    return [r.load() for r in records]


def calibrate_subject(records: Sequence[ActivityRecord], config: PipelineConfig = PipelineConfig(),
                      detections: Optional[dict] = None) -> CalibrationModel:
    """Fit one subject's step-length model from their speed-calibration records."""
    calib = [r for r in _loaded(records) if r.activity.is_calibration]
    if not calib:
        raise EmptyInputError("no speed-calibration activities in records")
    subject_ids = {r.subject_id for r in calib}
    if len(subject_ids) > 1:
        raise ValueError(f"records span several subjects: {sorted(subject_ids)}")
    detections = detections if detections is not None else {}
    segments = {}
    for r in calib:
        if r.activity not in detections:
            detections[r.activity] = detect_series(r.series, config)
        segments[r.activity] = detections[r.activity].segments
    points = build_points(calib, segments)
    return fit(points, config.form, subject_id=calib[0].subject_id)


@dataclass
class SubjectAnalysis:
    subject_id: str
    results: list[ActivityResult] = field(default_factory=list)
    events: dict[Activity, list[EventRow]] = field(default_factory=dict)
    detections: dict[Activity, Detection] = field(default_factory=dict)


def analyze_subject(records: Sequence[ActivityRecord], model: CalibrationModel,
                    config: PipelineConfig = PipelineConfig(),
                    detections: Optional[dict] = None) -> SubjectAnalysis:
    """Estimates and event rows for every activity of one subject."""
    records = _loaded(records)
    out = SubjectAnalysis(model.subject_id)
    for r in records:
        det = (detections or {}).get(r.activity) or detect_series(r.series, config)
        est, dist = estimate_activity(model, det.segments, det.t, r.activity)
        out.results.append(ActivityResult.from_record(r, est, dist.step_lengths_m))
        out.events[r.activity] = det.event_rows(dist.step_lengths_m)
        out.detections[r.activity] = det
    return out


def run_subject(records: Sequence[ActivityRecord], config: PipelineConfig = PipelineConfig()
                ) -> tuple[CalibrationModel, SubjectAnalysis]:
    """Calibrate on the speed levels, then analyse every activity, detecting each trace once."""
    detections: dict = {}
    model = calibrate_subject(records, config, detections)
    return model, analyze_subject(records, model, config, detections)


def subject_gait_maps(records: Sequence[ActivityRecord], config: PipelineConfig = PipelineConfig(),
                      detections: Optional[dict] = None) -> list[CompositeMap]:
    """One composite per activity plus an all-activities composite, in record order."""
    maps = []
    subject_id = None
    for r in _loaded(records):
        subject_id = r.subject_id
        det = (detections or {}).get(r.activity) or detect_series(r.series, config)
        cycles, _ = cycles_from_segments(det.raw_ap, det.segments, subject_id=r.subject_id,
                                         activity=r.activity)
        if not cycles:
            logger.warning("%s %s: no usable cycles", r.subject_id, r.activity)
            continue
        maps.append(composite(cycles, r.subject_id, r.activity.value))
    if maps:
        maps.append(merge_composites(maps, subject_id, ALL_ACTIVITIES))
    return maps
