"""Temporospatial gait features and gait events from a waist-worn triaxial accelerometer."""

__version__ = "0.1.0"

from .calibration import CalibrationModel, RegressionForm, fit, predict_step_length
from .estimate import ActivityEstimate, ActivityResult, estimate_activity, estimate_distance
from .estimators import GaitAnalyzer, StepDetector, StepLengthRegressor
from .gaitmap import CompositeMap, NormalizedCycle, composite, normalize_cycle
from .metrics import MetricsReport, adjusted_r2, build_report, error_rate, mean_sd, pct_error, pearson
from .pipeline import PipelineConfig, analyze_subject, calibrate_subject, detect_series, run_subject
from .preprocess import FilterSpec, FilteredSeries, lowpass, resample_uniform
from .signal_io import AccelSeries, Activity, ActivityRecord, parse_accel_csv, parse_manifest
from .step_detect import Detection, PeakParams, StepSegment, count_steps, detect_steps, find_peaks
from .synth import GaitProfile, SynthTruth, generate_activity, generate_cohort, simulate_cohort, simulate_subject

__all__ = [
    "AccelSeries", "Activity", "ActivityEstimate", "ActivityRecord", "ActivityResult",
    "CalibrationModel", "CompositeMap", "Detection", "FilterSpec", "FilteredSeries",
    "GaitAnalyzer", "GaitProfile", "MetricsReport", "NormalizedCycle", "PeakParams",
    "PipelineConfig", "RegressionForm", "StepDetector", "StepLengthRegressor", "StepSegment",
    "SynthTruth", "adjusted_r2", "analyze_subject", "build_report", "calibrate_subject",
    "composite", "count_steps", "detect_series", "detect_steps", "error_rate",
    "estimate_activity", "estimate_distance", "find_peaks", "fit", "generate_activity",
    "generate_cohort", "lowpass", "mean_sd", "normalize_cycle", "parse_accel_csv",
    "parse_manifest", "pct_error", "pearson", "predict_step_length", "resample_uniform",
    "run_subject", "simulate_cohort", "simulate_subject",
]
