"""Per-subject step-length calibration.

Each speed-calibration activity contributes one point: the mean initial
contact peak (g) against the observed distance divided by the detected step
count. A low-order least-squares polynomial through the points maps any
step's peak acceleration to its length.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np
import yaml

from .exceptions import DegenerateDesignError, InsufficientStepsError, UnderdeterminedError
from .signal_io import Activity, ActivityRecord, write_text
from .step_detect import StepSegment

MIN_CALIBRATION_STEPS = 3
EXTRAPOLATION_FACTOR = 1.5


class RegressionForm(str, enum.Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"

    @property
    def n_coefficients(self) -> int:
        return 2 if self is RegressionForm.LINEAR else 3

    @classmethod
    def parse(cls, value) -> "RegressionForm":
        if isinstance(value, cls):
            return value
        return cls(str(value).strip().lower())


@dataclass(frozen=True)
class CalibrationPoint:
    activity: Activity
    mean_peak_g: float
    mean_step_length_m: float

    def __post_init__(self):
        if not self.mean_peak_g > 0:
            raise DegenerateDesignError(
                f"{self.activity}: mean peak acceleration must be positive, got {self.mean_peak_g}"
            )
        if not self.mean_step_length_m > 0:
            raise DegenerateDesignError(
                f"{self.activity}: mean step length must be positive, got {self.mean_step_length_m}"
            )


class StepLengthPrediction(NamedTuple):
    length_m: float
    extrapolated: bool
    clamped: bool


@dataclass(frozen=True)
class CalibrationModel:
    subject_id: str
    form: RegressionForm
    coefficients: tuple[float, ...]  # intercept first
    fit_points: tuple[CalibrationPoint, ...]
    residual_rms_m: float
    domain_g: tuple[float, float]

    def __post_init__(self):
        if len(self.coefficients) != self.form.n_coefficients:
            raise ValueError(
                f"{self.form.value} model needs {self.form.n_coefficients} coefficients, "
                f"got {len(self.coefficients)}"
            )

    def evaluate(self, peak_g):
        """Raw polynomial value (no clamping)."""
        x = np.asarray(peak_g, dtype=float)
        return np.polynomial.polynomial.polyval(x, self.coefficients)

    def is_extrapolated(self, peak_g: float) -> bool:
        lo, hi = self.domain_g
        return not (lo / EXTRAPOLATION_FACTOR <= peak_g <= hi * EXTRAPOLATION_FACTOR)

    def predict(self, peak_g: float) -> StepLengthPrediction:
        return predict_step_length(self, peak_g)

    def residuals(self) -> np.ndarray:
        x = np.array([p.mean_peak_g for p in self.fit_points])
        y = np.array([p.mean_step_length_m for p in self.fit_points])
        return y - self.evaluate(x)


def build_points(
    records: Sequence[ActivityRecord],
    segments: Mapping[Activity, Sequence[StepSegment]],
) -> list[CalibrationPoint]:
    """One calibration point per speed-calibration record."""
    points = []
    for record in records:
        if not record.activity.is_calibration:
            raise ValueError(f"{record.activity} is not a speed-calibration activity")
        if record.observed_distance_m is None:
            raise ValueError(f"{record.activity}: observed distance missing")
        segs = segments.get(record.activity, ())
        if len(segs) < MIN_CALIBRATION_STEPS:
            raise InsufficientStepsError(record.activity.value, len(segs), MIN_CALIBRATION_STEPS)
        peaks = [s.ic_peak_g for s in segs]
        points.append(CalibrationPoint(
            activity=record.activity,
            mean_peak_g=float(np.mean(peaks)),
            mean_step_length_m=float(record.observed_distance_m) / len(segs),
        ))
    return points


def _design(x: np.ndarray, form: RegressionForm) -> np.ndarray:
    return np.vander(x, form.n_coefficients, increasing=True)


def fit(points: Sequence[CalibrationPoint], form=RegressionForm.LINEAR, subject_id: str = "") -> CalibrationModel:
    """Ordinary least squares of step length on mean peak acceleration."""
    form = RegressionForm.parse(form)
    points = tuple(points)
    x = np.array([p.mean_peak_g for p in points], dtype=float)
    y = np.array([p.mean_step_length_m for p in points], dtype=float)
    if len(points) < form.n_coefficients:
        raise UnderdeterminedError(
            f"{form.value} fit needs at least {form.n_coefficients} points, got {len(points)}"
        )
    distinct = np.unique(x).size
    if distinct < 2:
        raise DegenerateDesignError("all calibration points share the same peak acceleration")
    if distinct < form.n_coefficients:
        raise DegenerateDesignError(
            f"{form.value} fit needs {form.n_coefficients} distinct peak accelerations, got {distinct}"
        )
    coef, *_ = np.linalg.lstsq(_design(x, form), y, rcond=None)
    resid = y - _design(x, form) @ coef
    return CalibrationModel(
        subject_id=subject_id,
        form=form,
        coefficients=tuple(float(c) for c in coef),
        fit_points=points,
        residual_rms_m=float(math.sqrt(np.mean(resid ** 2))),
        domain_g=(float(x.min()), float(x.max())),
    )


def predict_step_length(model: CalibrationModel, peak_g: float) -> StepLengthPrediction:
    """Step length for one step; negative values clamp to 0.

    ``extrapolated`` is set when ``peak_g`` lies outside
    ``[min / 1.5, max * 1.5]`` of the calibration peaks.
    """
    raw = float(model.evaluate(float(peak_g)))
    clamped = raw < 0
    return StepLengthPrediction(max(raw, 0.0), model.is_extrapolated(float(peak_g)), clamped)


# ---------------------------------------------------------------------------
# model file
# ---------------------------------------------------------------------------

def model_document(model: CalibrationModel) -> dict:
    return {
        "subject_id": model.subject_id,
        "form": model.form.value,
        "coefficients": [float(c) for c in model.coefficients],
        "residual_rms_m": float(model.residual_rms_m),
        "domain_g": [float(v) for v in model.domain_g],
        "fit_points": [
            {
                "activity": p.activity.value,
                "mean_peak_g": float(p.mean_peak_g),
                "mean_step_length_m": float(p.mean_step_length_m),
            }
            for p in model.fit_points
        ],
    }


def save_model(model: CalibrationModel, path) -> None:
    write_text(path, yaml.safe_dump(model_document(model), sort_keys=False))


def save_models(models: Sequence[CalibrationModel], path) -> None:
    """Several subjects' models as one multi-document YAML file."""
    write_text(path, yaml.safe_dump_all([model_document(m) for m in models], sort_keys=False))


def _from_document(doc, path) -> CalibrationModel:
    try:
        return CalibrationModel(
            subject_id=str(doc["subject_id"]),
            form=RegressionForm.parse(doc["form"]),
            coefficients=tuple(float(c) for c in doc["coefficients"]),
            fit_points=tuple(
                CalibrationPoint(Activity.parse(p["activity"]), float(p["mean_peak_g"]),
                                 float(p["mean_step_length_m"]))
                for p in doc["fit_points"]
            ),
            residual_rms_m=float(doc["residual_rms_m"]),
            domain_g=(float(doc["domain_g"][0]), float(doc["domain_g"][1])),
        )
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise ValueError(f"{path}: malformed model file ({exc})") from exc


def load_models(path) -> dict[str, CalibrationModel]:
    with open(path, encoding="utf-8") as fh:
        docs = [d for d in yaml.safe_load_all(fh) if d is not None]
    models = [_from_document(d, path) for d in docs]
    return {m.subject_id: m for m in models}


def load_model(path) -> CalibrationModel:
    models = load_models(path)
    if len(models) != 1:
        raise ValueError(f"{path}: expected one model, found {len(models)}")
    return next(iter(models.values()))
