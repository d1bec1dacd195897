"""Reading and writing of traces, manifests, events, estimates and reports.

File formats
------------
Trace CSV
    Header ``t,x,y,z``. ``t`` in seconds since session start, ``x`` (vertical),
    ``y`` (mediolateral) and ``z`` (anteroposterior) in g.
Manifest
    YAML, one document per subject, with ``subject_id``, an optional ``cohort``
    and an ``activities`` list. Trace paths are resolved relative to the
    manifest's directory.
Events CSV
    One row per detected step:
    ``step_index,start_t,to_t,ic_t,end_t,ic_peak_g,step_length_m``.
Estimates CSV / report CSV
    Per-activity feature rows, and aggregated metric rows.

Every writer formats reals with six fractional digits and writes LF line
endings, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

import numpy as np
import yaml

from .exceptions import (
    CompletenessError,
    EnumerationError,
    ManifestError,
    MissingTraceError,
    NonFiniteValueError,
    OrderingError,
    OutputError,
    TraceFormatError,
)

if TYPE_CHECKING:
    from .estimate import ActivityResult
    from .metrics import MetricsReport

logger = logging.getLogger(__name__)

DEFAULT_RATE_HZ = 100.0
IRREGULAR_TOLERANCE = 0.20


class Activity(str, enum.Enum):
    SC_L1 = "SC-L1"
    SC_L2 = "SC-L2"
    SC_L3 = "SC-L3"
    SC_L4 = "SC-L4"
    SC_L5 = "SC-L5"
    SIX_MWT = "6MWT"
    HUNDRED_MRW = "100MRW"
    FW = "FW"

    @classmethod
    def parse(cls, label) -> "Activity":
        if isinstance(label, Activity):
            return label
        key = str(label).strip()
        alias = _ACTIVITY_ALIASES.get(key.upper())
        if alias is None:
            raise EnumerationError(
                f"unknown activity label {label!r}; expected one of "
                + ", ".join(a.value for a in cls)
            )
        return alias

    @property
    def is_calibration(self) -> bool:
        return self in CALIBRATION_ACTIVITIES

    def __str__(self) -> str:
        return self.value


_ACTIVITY_ALIASES = {a.value.upper(): a for a in Activity}
_ACTIVITY_ALIASES.update({"SIXMWT": Activity.SIX_MWT, "HUNDREDMRW": Activity.HUNDRED_MRW})

CALIBRATION_ACTIVITIES = (
    Activity.SC_L1, Activity.SC_L2, Activity.SC_L3, Activity.SC_L4, Activity.SC_L5,
)
EVALUATION_ACTIVITIES = (Activity.SIX_MWT, Activity.HUNDRED_MRW, Activity.FW)


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class AccelSeries:
    """Timestamped triaxial acceleration trace for one activity.

    ``x`` is vertical, ``y`` mediolateral and ``z`` anteroposterior, all in g.
    Arrays are stored read-only.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    nominal_rate_hz: float = DEFAULT_RATE_HZ

    def __post_init__(self):
        arrays = {name: _frozen(getattr(self, name)) for name in ("t", "x", "y", "z")}
        n = arrays["t"].shape
        for name, arr in arrays.items():
            if arr.ndim != 1 or arr.shape != n:
                raise TraceFormatError("t, x, y and z must be 1-D arrays of equal length")
            if not np.all(np.isfinite(arr)):
                bad = int(np.flatnonzero(~np.isfinite(arr))[0])
                raise NonFiniteValueError(f"non-finite {name} at data row {bad + 1}")
            object.__setattr__(self, name, arr)
        if not (self.nominal_rate_hz > 0 and math.isfinite(self.nominal_rate_hz)):
            raise TraceFormatError(f"nominal_rate_hz must be positive, got {self.nominal_rate_hz}")
        t = arrays["t"]
        if t.size and t[0] < 0:
            raise NonFiniteValueError("timestamps must be non-negative")
        if t.size > 1:
            steps = np.diff(t)
            if np.any(steps <= 0):
                raise OrderingError(int(np.flatnonzero(steps <= 0)[0]) + 2)

    def __len__(self) -> int:
        return int(self.t.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AccelSeries):
            return NotImplemented
        return (
            self.nominal_rate_hz == other.nominal_rate_hz
            and all(np.array_equal(getattr(self, k), getattr(other, k)) for k in "txyz")
        )

    @property
    def ap(self) -> np.ndarray:
        """Anteroposterior channel."""
        return self.z

    @property
    def duration_s(self) -> float:
        return float(self.t[-1] - self.t[0]) if len(self) > 1 else 0.0

    @property
    def median_interval_s(self) -> float:
        if len(self) < 2:
            return float("nan")
        return float(np.median(np.diff(self.t)))

    @property
    def is_irregular(self) -> bool:
        """True when the median sample interval is off nominal by more than 20%."""
        if len(self) < 2:
            return False
        nominal = 1.0 / self.nominal_rate_hz
        return abs(self.median_interval_s - nominal) > IRREGULAR_TOLERANCE * nominal

    def shifted(self, dt: float) -> "AccelSeries":
        return replace(self, t=self.t + dt)


@dataclass(frozen=True)
class ActivityRecord:
    """One activity of one subject: trace location, ground truth, pedometer values."""

    subject_id: str
    activity: Activity
    trace_path: Optional[Path] = None
    observed_distance_m: Optional[float] = None
    observed_steps: Optional[int] = None
    observed_duration_s: Optional[float] = None
    pedometer_steps: Optional[int] = None
    pedometer_distance_m: Optional[float] = None
    cohort: Optional[str] = None
    series: Optional[AccelSeries] = field(default=None, compare=False, repr=False)

    def load(self, nominal_rate_hz: float = DEFAULT_RATE_HZ) -> "ActivityRecord":
        """Return a copy with ``series`` read from ``trace_path``."""
        if self.series is not None:
            return self
        if self.trace_path is None:
            raise MissingTraceError(f"{self.subject_id}/{self.activity}: no trace path")
        return replace(self, series=parse_accel_csv(self.trace_path, nominal_rate_hz))

    @property
    def has_ground_truth(self) -> bool:
        return self.observed_distance_m is not None and self.observed_steps is not None


# ---------------------------------------------------------------------------
# trace CSV
# ---------------------------------------------------------------------------

TRACE_HEADER = ("t", "x", "y", "z")


def parse_accel_csv(path, nominal_rate_hz: float = DEFAULT_RATE_HZ) -> AccelSeries:
    """Read a ``t,x,y,z`` trace CSV into an :class:`AccelSeries`.

    Raises
    ------
    TraceFormatError
        Missing or wrong header, wrong column count, unparsable number.
    OrderingError
        Timestamps not strictly increasing; ``.row`` is the 1-based data row.
    NonFiniteValueError
        NaN/inf anywhere, or a negative timestamp.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceFormatError(f"{path}: empty file, expected header t,x,y,z") from None
        if tuple(h.strip().lower() for h in header) != TRACE_HEADER:
            raise TraceFormatError(f"{path}: bad header {header!r}, expected t,x,y,z")
        rows = []
        for lineno, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != 4:
                raise TraceFormatError(f"{path}: data row {lineno} has {len(row)} fields, expected 4")
            try:
                values = [float(v) for v in row]
            except ValueError:
                raise TraceFormatError(f"{path}: data row {lineno} is not numeric: {row!r}") from None
            if not all(math.isfinite(v) for v in values):
                raise NonFiniteValueError(f"{path}: non-finite value at data row {lineno}")
            if values[0] < 0:
                raise NonFiniteValueError(f"{path}: negative timestamp at data row {lineno}")
            if rows and values[0] <= rows[-1][0]:
                raise OrderingError(lineno, f"{path}: timestamps not strictly increasing at data row {lineno}")
            rows.append(values)

    data = np.array(rows, dtype=float).reshape(-1, 4)
    series = AccelSeries(data[:, 0], data[:, 1], data[:, 2], data[:, 3], nominal_rate_hz)
    if series.is_irregular:
        logger.warning(
            "%s: median interval %.6f s deviates from nominal %.6f s; series flagged irregular",
            path, series.median_interval_s, 1.0 / nominal_rate_hz,
        )
    return series


def write_accel_csv(series: AccelSeries, path) -> None:
    rows = (
        (fmt_real(t), fmt_real(x), fmt_real(y), fmt_real(z))
        for t, x, y, z in zip(series.t, series.x, series.y, series.z)
    )
    write_csv(path, TRACE_HEADER, rows)


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------

_MANIFEST_FIELDS = (
    "observed_distance_m", "observed_steps", "observed_duration_s",
    "pedometer_steps", "pedometer_distance_m",
)


def _opt_number(entry: dict, key: str, where: str, *, integer=False, positive=False):
    value = entry.get(key)
    if value is None or value == "":
        return None
    if isinstance(value, bool):
        raise ManifestError(f"{where}: {key} must be numeric, got {value!r}")
    try:
        num = float(value)
    except (TypeError, ValueError):
        raise ManifestError(f"{where}: {key} must be numeric, got {value!r}") from None
    if not math.isfinite(num):
        raise ManifestError(f"{where}: {key} must be finite")
    if integer:
        if num != int(num):
            raise ManifestError(f"{where}: {key} must be an integer, got {value!r}")
        num = int(num)
    if positive and num <= 0:
        raise ManifestError(f"{where}: {key} must be positive, got {value!r}")
    if num < 0 and key.startswith("observed"):
        raise ManifestError(f"{where}: {key} must be non-negative, got {value!r}")
    return num


def parse_manifest(path, *, check_traces: bool = True) -> list[ActivityRecord]:
    """Parse a subject manifest into :class:`ActivityRecord` references.

    Traces are not loaded; call :meth:`ActivityRecord.load`. Calibration
    activities (SC-L1..SC-L5) must carry ``observed_distance_m`` and
    ``observed_steps``.
    """
    path = Path(path)
    base = path.parent
    try:
        with open(path, encoding="utf-8") as fh:
            documents = [d for d in yaml.safe_load_all(fh) if d is not None]
    except yaml.YAMLError as exc:
        raise ManifestError(f"{path}: not valid YAML: {exc}") from exc

    records: list[ActivityRecord] = []
    for doc in documents:
        if not isinstance(doc, dict) or "subject_id" not in doc:
            raise ManifestError(f"{path}: each document needs a subject_id")
        subject = str(doc["subject_id"])
        cohort = doc.get("cohort")
        entries = doc.get("activities") or []
        if not isinstance(entries, list):
            raise ManifestError(f"{path}: 'activities' must be a list")
        for entry in entries:
            if not isinstance(entry, dict) or "activity" not in entry:
                raise ManifestError(f"{path}: activity entry without 'activity' label")
            activity = Activity.parse(entry["activity"])
            where = f"{path}: {subject}/{activity}"
            values = {
                "observed_distance_m": _opt_number(entry, "observed_distance_m", where),
                "observed_steps": _opt_number(entry, "observed_steps", where, integer=True),
                "observed_duration_s": _opt_number(entry, "observed_duration_s", where, positive=True),
                "pedometer_steps": _opt_number(entry, "pedometer_steps", where, integer=True),
                "pedometer_distance_m": _opt_number(entry, "pedometer_distance_m", where),
            }
            if activity.is_calibration:
                missing = [k for k in ("observed_distance_m", "observed_steps") if values[k] is None]
                if missing:
                    raise CompletenessError(
                        f"{where}: calibration activity {activity} lacks {', '.join(missing)}"
                    )
            trace = entry.get("trace")
            trace_path = None
            if trace is not None:
                trace_path = Path(trace)
                if not trace_path.is_absolute():
                    trace_path = base / trace_path
                if check_traces and not trace_path.is_file():
                    raise MissingTraceError(f"{where}: trace {trace_path} not found")
            elif check_traces:
                raise MissingTraceError(f"{where}: no trace path given")
            records.append(ActivityRecord(
                subject_id=subject,
                activity=activity,
                trace_path=trace_path,
                cohort=None if cohort is None else str(cohort),
                **values,
            ))
    return records


def manifest_document(subject_id: str, entries: Sequence[dict], cohort: Optional[str] = None) -> dict:
    doc = {"subject_id": subject_id}
    if cohort is not None:
        doc["cohort"] = cohort
    doc["activities"] = [
        {k: e[k] for k in ("activity", "trace", *_MANIFEST_FIELDS) if e.get(k) is not None}
        for e in entries
    ]
    return doc


def write_yaml(document: dict, path) -> None:
    text = yaml.safe_dump(document, sort_keys=False, default_flow_style=False)
    write_text(path, text)


# ---------------------------------------------------------------------------
# events CSV
# ---------------------------------------------------------------------------

EVENTS_HEADER = ("step_index", "start_t", "to_t", "ic_t", "end_t", "ic_peak_g", "step_length_m")


@dataclass(frozen=True)
class EventRow:
    step_index: int
    start_t: float
    to_t: float
    ic_t: float
    end_t: float
    ic_peak_g: float
    step_length_m: Optional[float] = None


def write_events_csv(events: Iterable[EventRow], path) -> None:
    rows = (
        (str(e.step_index), fmt_real(e.start_t), fmt_real(e.to_t), fmt_real(e.ic_t), fmt_real(e.end_t),
         fmt_real(e.ic_peak_g), fmt_real(e.step_length_m))
        for e in events
    )
    write_csv(path, EVENTS_HEADER, rows)


def parse_events_csv(path) -> list[EventRow]:
    out = []
    for row in _read_csv(path, EVENTS_HEADER):
        out.append(EventRow(
            step_index=int(row["step_index"]),
            start_t=float(row["start_t"]),
            to_t=float(row["to_t"]),
            ic_t=float(row["ic_t"]),
            end_t=float(row["end_t"]),
            ic_peak_g=float(row["ic_peak_g"]),
            step_length_m=_opt_float(row["step_length_m"]),
        ))
    return out


# ---------------------------------------------------------------------------
# per-activity estimates CSV
# ---------------------------------------------------------------------------

ESTIMATES_HEADER = (
    "subject_id", "cohort", "activity", "step_count", "distance_m", "avg_step_length_m",
    "avg_step_duration_s", "cadence_steps_per_min", "speed_m_per_s",
    "extrapolated_step_fraction", "observed_steps", "observed_distance_m",
    "observed_duration_s", "pedometer_steps", "pedometer_distance_m",
)


def write_estimates_csv(results: Iterable["ActivityResult"], path) -> None:
    def row(r):
        e = r.estimate
        return (
            r.subject_id, r.cohort or "", str(r.activity), str(e.step_count), fmt_real(e.distance_m),
            fmt_real(e.avg_step_length_m), fmt_real(e.avg_step_duration_s),
            fmt_real(e.cadence_steps_per_min), fmt_real(e.speed_m_per_s),
            fmt_real(e.extrapolated_step_fraction), _fmt_int(r.observed_steps),
            fmt_real(r.observed_distance_m), fmt_real(r.observed_duration_s),
            _fmt_int(r.pedometer_steps), fmt_real(r.pedometer_distance_m),
        )

    write_csv(path, ESTIMATES_HEADER, (row(r) for r in results))


def parse_estimates_csv(path) -> list["ActivityResult"]:
    from .estimate import ActivityEstimate, ActivityResult

    out = []
    for row in _read_csv(path, ESTIMATES_HEADER):
        activity = Activity.parse(row["activity"])
        estimate = ActivityEstimate(
            activity=activity,
            step_count=int(row["step_count"]),
            distance_m=_opt_float(row["distance_m"]),
            avg_step_length_m=_opt_float(row["avg_step_length_m"]),
            avg_step_duration_s=_opt_float(row["avg_step_duration_s"]),
            cadence_steps_per_min=_opt_float(row["cadence_steps_per_min"]),
            speed_m_per_s=_opt_float(row["speed_m_per_s"]),
            extrapolated_step_fraction=_opt_float(row["extrapolated_step_fraction"]),
        )
        out.append(ActivityResult(
            subject_id=row["subject_id"],
            cohort=row["cohort"] or None,
            activity=activity,
            estimate=estimate,
            observed_steps=_opt_int(row["observed_steps"]),
            observed_distance_m=_opt_float(row["observed_distance_m"]),
            observed_duration_s=_opt_float(row["observed_duration_s"]),
            pedometer_steps=_opt_int(row["pedometer_steps"]),
            pedometer_distance_m=_opt_float(row["pedometer_distance_m"]),
        ))
    return out


# ---------------------------------------------------------------------------
# metrics report CSV
# ---------------------------------------------------------------------------

REPORT_HEADER = (
    "activity_set", "cohort", "source", "quantity", "n", "gt_total", "error_rate_pct",
    "mean_pct_error", "sd_pct_error", "pearson_r", "p_value", "adjusted_r2", "n_excluded",
)

P_FLOOR = 1e-15


def format_p_value(p: Optional[float]) -> str:
    if p is None:
        return ""
    if p < P_FLOOR:
        return "<1e-15"
    return f"{p:.6e}"


def write_report(report: Iterable["MetricsReport"], path) -> None:
    """Write metric rows (one :class:`~gaitcf.metrics.MetricsReport` each)."""
    rows = (
        (r.activity_set, r.cohort, r.source, r.quantity, str(r.n_pairs), fmt_real(r.gt_total),
         fmt_real(r.error_rate_pct), fmt_real(r.mean_pct_error), fmt_real(r.sd_pct_error),
         fmt_real(r.pearson_r), format_p_value(r.p_value), fmt_real(r.adjusted_r2), str(r.n_excluded))
        for r in report
    )
    write_csv(path, REPORT_HEADER, rows)


def parse_report(path) -> list["MetricsReport"]:
    from .metrics import MetricsReport

    out = []
    for row in _read_csv(path, REPORT_HEADER):
        p = row["p_value"]
        out.append(MetricsReport(
            activity_set=row["activity_set"],
            cohort=row["cohort"],
            source=row["source"],
            quantity=row["quantity"],
            n_pairs=int(row["n"]),
            gt_total=_opt_float(row["gt_total"]),
            error_rate_pct=_opt_float(row["error_rate_pct"]),
            mean_pct_error=_opt_float(row["mean_pct_error"]),
            sd_pct_error=_opt_float(row["sd_pct_error"]),
            pearson_r=_opt_float(row["pearson_r"]),
            p_value=0.0 if p == "<1e-15" else _opt_float(p),
            adjusted_r2=_opt_float(row["adjusted_r2"]),
            n_excluded=int(row["n_excluded"]),
        ))
    return out


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def fmt_real(value: Optional[float]) -> str:
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return ""
    s = f"{value:.6f}"
    return "0.000000" if s == "-0.000000" else s


def _fmt_int(value: Optional[int]) -> str:
    return "" if value is None else str(int(value))


def _opt_float(s: str) -> Optional[float]:
    return None if s == "" else float(s)


def _opt_int(s: str) -> Optional[int]:
    return None if s == "" else int(s)


def write_text(path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    write_text(path, buf.getvalue())


def _read_csv(path, header: Sequence[str]) -> list[dict]:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != tuple(header):
            raise TraceFormatError(f"{path}: unexpected header {reader.fieldnames!r}")
        return list(reader)
