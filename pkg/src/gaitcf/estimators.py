"""Scikit-learn style wrappers around the gait pipeline.

``StepDetector`` turns traces into per-trace step features,
``StepLengthRegressor`` maps peak acceleration to step length, and
``GaitAnalyzer`` chains them into a calibrated distance estimator.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted, check_X_y

from ._validation import as_series, as_series_list, check_peaks
from .calibration import MIN_CALIBRATION_STEPS, CalibrationModel, CalibrationPoint, RegressionForm, fit
from .estimate import ActivityEstimate, estimate_activity
from .exceptions import InsufficientStepsError
from .pipeline import PipelineConfig, detect_series
from .preprocess import FilterSpec
from .signal_io import CALIBRATION_ACTIVITIES, DEFAULT_RATE_HZ, Activity
from .step_detect import Detection, PeakParams

FEATURES = ("step_count", "mean_ic_peak_g", "active_duration_s")


class _DetectorParams:
    """Mixin holding the filter and peak-picking hyperparameters."""

    def _config(self, form=RegressionForm.LINEAR) -> PipelineConfig:
        return PipelineConfig(
            FilterSpec(self.cutoff_hz, self.filter_order, self.zero_phase),
            PeakParams(self.min_separation_s, self.min_prominence_g),
            RegressionForm.parse(form),
        )


class StepDetector(_DetectorParams, TransformerMixin, BaseEstimator):
    """Stateless step detector.

    ``transform`` returns one row per trace with columns
    ``step_count, mean_ic_peak_g, active_duration_s``. Traces with no
    detected steps give ``0, nan, 0``.
    """

    def __init__(self, cutoff_hz=3.0, filter_order=4, zero_phase=True,
                 min_separation_s=0.25, min_prominence_g=0.05, rate_hz=DEFAULT_RATE_HZ):
        self.cutoff_hz = cutoff_hz
        self.filter_order = filter_order
        self.zero_phase = zero_phase
        self.min_separation_s = min_separation_s
        self.min_prominence_g = min_prominence_g
        self.rate_hz = rate_hz

    def fit(self, X=None, y=None):
        # validates the hyperparameters; nothing is learned
        config = self._config()
        config.filter_spec.check_rate(self.rate_hz)
        config.peak_params.separation_samples(self.rate_hz)
        self.config_ = config
        return self

    def detect(self, series) -> Detection:
        config = getattr(self, "config_", None) or self._config()
        return detect_series(as_series(series, self.rate_hz), config)

    def transform(self, X) -> np.ndarray:
        rows = []
        for series in as_series_list(X, self.rate_hz):
            det = self.detect(series)
            if not det.segments:
                rows.append((0.0, np.nan, 0.0))
                continue
            segs = det.segments
            rows.append((
                float(len(segs)),
                float(np.mean([s.ic_peak_g for s in segs])),
                float(det.t[segs[-1].end_idx] - det.t[segs[0].start_idx]),
            ))
        return np.array(rows, dtype=float)

    def get_feature_names_out(self, input_features=None):
        return np.array(FEATURES, dtype=object)


class StepLengthRegressor(RegressorMixin, BaseEstimator):
    """Least-squares polynomial from mean peak acceleration (g) to step length (m).

    Predictions are clamped at zero.
    """

    def __init__(self, form="linear"):
        self.form = form

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_samples=2, y_numeric=True)
        X = check_peaks(X)
        acts = [CALIBRATION_ACTIVITIES[i % len(CALIBRATION_ACTIVITIES)] for i in range(len(y))]
        points = [CalibrationPoint(a, float(x), float(v)) for a, x, v in zip(acts, X[:, 0], y)]
        self.model_ = fit(points, RegressionForm.parse(self.form))
        self.coef_ = np.array(self.model_.coefficients[1:])
        self.intercept_ = self.model_.coefficients[0]
        self.n_features_in_ = 1
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        X = check_peaks(X)
        return np.maximum(self.model_.evaluate(X[:, 0]), 0.0)


class GaitAnalyzer(_DetectorParams, RegressorMixin, BaseEstimator):
    """Calibrated distance estimator for one subject.

    ``fit`` takes the speed-calibration traces and their walked distances;
    ``predict`` returns the estimated distance of each trace.
    """

    def __init__(self, form="linear", cutoff_hz=3.0, filter_order=4, zero_phase=True,
                 min_separation_s=0.25, min_prominence_g=0.05, rate_hz=DEFAULT_RATE_HZ):
        self.form = form
        self.cutoff_hz = cutoff_hz
        self.filter_order = filter_order
        self.zero_phase = zero_phase
        self.min_separation_s = min_separation_s
        self.min_prominence_g = min_prominence_g
        self.rate_hz = rate_hz

    def _detector(self) -> StepDetector:
        return StepDetector(self.cutoff_hz, self.filter_order, self.zero_phase,
                            self.min_separation_s, self.min_prominence_g, self.rate_hz).fit()

    def fit(self, X, y, activities: Optional[Sequence[Activity]] = None):
        series = as_series_list(X, self.rate_hz)
        y = np.asarray(y, dtype=float).ravel()
        if y.size != len(series):
            raise ValueError(f"{len(series)} traces but {y.size} distances")
        if activities is None:
            if len(series) > len(CALIBRATION_ACTIVITIES):
                raise ValueError("pass activities= when fitting on more than five traces")
            activities = CALIBRATION_ACTIVITIES[:len(series)]
        feats = self._detector().transform(series)
        points = []
        for act, row, dist in zip(activities, feats, y):
            if row[0] < MIN_CALIBRATION_STEPS:
                raise InsufficientStepsError(Activity.parse(act).value, int(row[0]), MIN_CALIBRATION_STEPS)
            points.append(CalibrationPoint(Activity.parse(act), row[1], dist / row[0]))
        self.model_: CalibrationModel = fit(points, RegressionForm.parse(self.form))
        self.config_ = self._config(self.form)
        return self

    def estimate(self, series, activity=Activity.FW) -> ActivityEstimate:
        check_is_fitted(self, "model_")
        det = detect_series(as_series(series, self.rate_hz), self.config_)
        est, _ = estimate_activity(self.model_, det.segments, det.t, Activity.parse(activity))
        return est

    def predict(self, X) -> np.ndarray:
        return np.array([self.estimate(s).distance_m for s in as_series_list(X, self.rate_hz)])
