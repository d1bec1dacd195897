"""Synthetic accelerometer sessions with exactly known ground truth.

Every step is one copy of a morphology template (a pulse over step phase
-0.5..0.5 whose maximum, 1.0, sits at phase 0 = initial contact). Copies are
scaled to that step's peak acceleration and placed so that initial contact
lands on a sample. Step length follows ``base + slope * peak``, which makes
the generator an oracle for detection, calibration and distance estimation.
"""

from __future__ import annotations

import csv
import logging
import math
import shutil
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import yaml

from .exceptions import OutputCollisionError, SynthConfigError
from .signal_io import (
    AccelSeries,
    Activity,
    ActivityRecord,
    CALIBRATION_ACTIVITIES,
    manifest_document,
    write_accel_csv,
    write_yaml,
)

logger = logging.getLogger(__name__)

TD_LIKE = "TD-like"
DMD_LIKE = "DMD-like"
MORPHOLOGIES = (TD_LIKE, DMD_LIKE)
_TEMPLATE_FILES = {TD_LIKE: "td_like.csv", DMD_LIKE: "dmd_like.csv"}

MAX_CADENCE = 4.0  # one step per default min_separation_s
LEAD_S = 0.25  # room for the edge steps to resolve; longer noisy standing adds spurious peaks


# ---------------------------------------------------------------------------
# templates
# ---------------------------------------------------------------------------

def _cusp(phase, centre, rise, decay):
    d = phase - centre
    return np.where(d < 0, np.exp(d / rise), np.exp(-d / decay))


def default_template(morphology: str, n: int = 1001) -> tuple[np.ndarray, np.ndarray]:
    """Analytic definition of the shipped template files."""
    phase = np.linspace(-0.5, 0.5, n)
    if morphology == TD_LIKE:
        g = _cusp(phase, 0.0, 0.05, 0.12)
    elif morphology == DMD_LIKE:
        g = _cusp(phase, 0.0, 0.05, 0.06) + 0.5 * _cusp(phase, 0.15, 0.06, 0.08)
    else:
        raise SynthConfigError(f"unknown morphology {morphology!r}")
    edge = np.interp(phase, [-0.5, 0.5], [g[0], g[-1]])
    g = g - edge
    peak = g[n // 2]
    return phase, g / peak


def write_template(path, phase, value) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("phase,value\n")
        for p, v in zip(phase, value):
            fh.write(f"{p:.6f},{v:.9f}\n")


def load_template(morphology_or_path) -> tuple[np.ndarray, np.ndarray]:
    """Read a template CSV (``phase,value``) by morphology name or path."""
    if morphology_or_path in _TEMPLATE_FILES:
        ref = resources.files("gaitcf") / "templates" / _TEMPLATE_FILES[morphology_or_path]
        text = ref.read_text(encoding="utf-8")
    else:
        text = Path(morphology_or_path).read_text(encoding="utf-8")
    rows = list(csv.reader(text.splitlines()))
    if rows[0] != ["phase", "value"]:
        raise SynthConfigError("template CSV must have header phase,value")
    data = np.array(rows[1:], dtype=float)
    phase, value = data[:, 0], data[:, 1]
    if phase[0] != -0.5 or phase[-1] != 0.5 or np.any(np.diff(phase) <= 0):
        raise SynthConfigError("template phase must increase from -0.5 to 0.5")
    i0 = np.flatnonzero(phase == 0.0)
    if i0.size != 1 or value[i0[0]] != value.max():
        raise SynthConfigError("template maximum must sit at phase 0")
    return phase, value / value[i0[0]]


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaitProfile:
    """Gait at one speed level.

    ``step_length_law`` is ``(base_m, slope_m_per_g)``: each step's length is
    ``base + slope * peak`` where ``peak`` is that step's maximum
    anteroposterior acceleration.
    """

    cadence_steps_per_s: float = 2.0
    peak_accel_g: float = 0.7
    step_length_law: tuple[float, float] = (0.45, 0.5)
    morphology: str = TD_LIKE
    noise_snr_db: float = math.inf
    rate_hz: float = 100.0
    peak_jitter: float = 0.05
    timing_jitter: float = 0.02

    def __post_init__(self):
        if not self.cadence_steps_per_s > 0:
            raise SynthConfigError("cadence must be positive")
        if self.cadence_steps_per_s > MAX_CADENCE:
            raise SynthConfigError(
                f"cadence {self.cadence_steps_per_s} steps/s exceeds {MAX_CADENCE} steps/s"
            )
        if not self.peak_accel_g > 0:
            raise SynthConfigError("peak_accel_g must be positive")
        if not self.rate_hz > 0:
            raise SynthConfigError("rate_hz must be positive")
        if self.rate_hz / self.cadence_steps_per_s < 8:
            raise SynthConfigError(
                f"{self.rate_hz} Hz gives fewer than 8 samples per step at cadence "
                f"{self.cadence_steps_per_s}"
            )
        if self.morphology not in MORPHOLOGIES and not Path(self.morphology).is_file():
            raise SynthConfigError(f"unknown morphology {self.morphology!r}")
        if self.peak_jitter < 0 or self.timing_jitter < 0 or self.timing_jitter >= 0.25:
            raise SynthConfigError("jitter fractions must be >= 0 (timing < 0.25)")


@dataclass(frozen=True)
class ActivityPlan:
    profile: GaitProfile
    duration_s: Optional[float] = None
    target_distance_m: Optional[float] = None


# speed levels: (cadence steps/s, peak g)
_TD_LEVELS = {
    Activity.SC_L1: (1.5, 0.35),
    Activity.SC_L2: (1.8, 0.50),
    Activity.SC_L3: (2.1, 0.70),
    Activity.SC_L4: (2.4, 0.95),
    Activity.SC_L5: (2.9, 1.40),
    Activity.SIX_MWT: (2.3, 0.90),
    Activity.HUNDRED_MRW: (2.8, 1.30),
    Activity.FW: (2.0, 0.65),
}
_EXTENT = {
    Activity.SIX_MWT: ("duration", 360.0),
    Activity.HUNDRED_MRW: ("distance", 100.0),
    Activity.FW: ("duration", 120.0),
}
CALIBRATION_DISTANCE_M = 25.0
DMD_AMPLITUDE_GAP = 0.75


def subject_plans(
    morphology: str = TD_LIKE,
    *,
    cadence_scale: float = 1.0,
    amplitude_scale: float = 1.0,
    step_length_law: tuple[float, float] = (0.45, 0.5),
    noise_snr_db: float = math.inf,
    rate_hz: float = 100.0,
) -> dict[Activity, ActivityPlan]:
    """The eight-activity protocol for one subject.

    DMD-like subjects get the double-lobe template and peaks scaled by
    :data:`DMD_AMPLITUDE_GAP`.
    """
    gap = DMD_AMPLITUDE_GAP if morphology == DMD_LIKE else 1.0
    plans = {}
    for activity, (cadence, peak) in _TD_LEVELS.items():
        profile = GaitProfile(
            cadence_steps_per_s=cadence * cadence_scale,
            peak_accel_g=peak * amplitude_scale * gap,
            step_length_law=step_length_law,
            morphology=morphology,
            noise_snr_db=noise_snr_db,
            rate_hz=rate_hz,
        )
        kind, amount = _EXTENT.get(activity, ("distance", CALIBRATION_DISTANCE_M))
        if kind == "duration":
            plans[activity] = ActivityPlan(profile, duration_s=amount)
        else:
            plans[activity] = ActivityPlan(profile, target_distance_m=amount)
    return plans


# ---------------------------------------------------------------------------
# activity generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SynthTruth:
    activity: Activity
    ic_indices: np.ndarray
    ic_times: np.ndarray
    peak_g: np.ndarray
    step_lengths_m: np.ndarray
    total_distance_m: float
    duration_s: float

    @property
    def step_count(self) -> int:
        return int(self.ic_indices.size)

    def to_document(self) -> dict:
        return {
            "activity": self.activity.value,
            "step_count": self.step_count,
            "total_distance_m": float(self.total_distance_m),
            "duration_s": float(self.duration_s),
            "ic_indices": [int(i) for i in self.ic_indices],
            "ic_times": [float(t) for t in self.ic_times],
            "peak_g": [float(a) for a in self.peak_g],
            "step_lengths_m": [float(s) for s in self.step_lengths_m],
        }

    @classmethod
    def from_document(cls, doc: dict) -> "SynthTruth":
        return cls(
            activity=Activity.parse(doc["activity"]),
            ic_indices=np.array(doc["ic_indices"], dtype=int),
            ic_times=np.array(doc["ic_times"], dtype=float),
            peak_g=np.array(doc["peak_g"], dtype=float),
            step_lengths_m=np.array(doc["step_lengths_m"], dtype=float),
            total_distance_m=float(doc["total_distance_m"]),
            duration_s=float(doc["duration_s"]),
        )


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def generate_activity(
    profile: GaitProfile,
    activity: Activity | str = Activity.SC_L3,
    duration_s: Optional[float] = None,
    target_distance_m: Optional[float] = None,
    seed=0,
    lead_s: float = LEAD_S,
) -> tuple[AccelSeries, SynthTruth]:
    """Synthesise one activity.

    Give exactly one of ``duration_s`` (steps whose initial contact falls
    within that span) or ``target_distance_m`` (steps until the cumulative
    length first reaches the target). ``lead_s`` of standing (noise only)
    precedes and follows the walk.
    """
    activity = Activity.parse(activity)
    if (duration_s is None) == (target_distance_m is None):
        raise SynthConfigError("give exactly one of duration_s or target_distance_m")
    if duration_s is not None and not duration_s > 0:
        raise SynthConfigError("duration_s must be positive")
    if target_distance_m is not None and not target_distance_m > 0:
        raise SynthConfigError("target_distance_m must be positive")
    rng = _rng(seed)
    rate = profile.rate_hz
    base, slope = profile.step_length_law
    period = rate / profile.cadence_steps_per_s  # samples per step

    # step timing and amplitude
    peaks, lengths, intervals = [], [], []
    total = 0.0
    elapsed = 0.0
    while True:
        if duration_s is not None and elapsed > duration_s * rate:
            break
        if target_distance_m is not None and total >= target_distance_m:
            break
        amp = profile.peak_accel_g * (1.0 + profile.peak_jitter * rng.standard_normal())
        amp = max(amp, 0.2 * profile.peak_accel_g)
        length = base + slope * amp
        if length <= 0:
            raise SynthConfigError("step-length law gives a non-positive step length")
        interval = period * (1.0 + profile.timing_jitter * rng.standard_normal())
        peaks.append(amp)
        lengths.append(length)
        intervals.append(interval)
        total += length
        elapsed += interval
    n_steps = len(peaks)

    lead = int(round(lead_s * rate))
    first = lead + int(math.ceil(intervals[0] / 2.0))
    ic = first + np.concatenate([[0.0], np.cumsum(intervals[:-1])])
    ic = np.rint(ic).astype(int)
    ic_intervals = np.diff(ic)
    last_interval = int(round(intervals[-1]))
    n_samples = ic[-1] + last_interval // 2 + lead + 1

    phase_grid, template = load_template(profile.morphology)
    clean = np.zeros(n_samples)
    idx = np.arange(n_samples)
    first_before = ic_intervals[0] if n_steps > 1 else last_interval
    for k in range(n_steps):
        before = ic_intervals[k - 1] if k > 0 else first_before
        after = ic_intervals[k] if k < n_steps - 1 else last_interval
        lo = (ic[k - 1] + ic[k]) // 2 + 1 if k > 0 else ic[k] - before // 2
        hi = (ic[k] + ic[k + 1]) // 2 if k < n_steps - 1 else ic[k] + after // 2
        d = idx[lo:hi + 1] - ic[k]
        phase = np.where(d < 0, d / before, d / after)
        clean[lo:hi + 1] = peaks[k] * np.interp(phase, phase_grid, template)

    active = slice(ic[0] - first_before // 2, ic[-1] + last_interval // 2 + 1)
    if math.isinf(profile.noise_snr_db):
        noise_sd = 0.0
    else:
        power = float(np.mean(clean[active] ** 2))
        noise_sd = math.sqrt(power / 10.0 ** (profile.noise_snr_db / 10.0))
    t = idx / rate
    ap = clean + noise_sd * rng.standard_normal(n_samples)
    vertical = 1.0 + 0.6 * np.roll(clean, 3) + noise_sd * rng.standard_normal(n_samples)
    sway = 0.05 * np.sin(np.pi * profile.cadence_steps_per_s * t)
    mediolateral = np.where(clean > 0, sway, 0.0) + noise_sd * rng.standard_normal(n_samples)
    series = AccelSeries(t, vertical, mediolateral, ap, nominal_rate_hz=rate)

    lengths = np.array(lengths)
    truth = SynthTruth(
        activity=activity,
        ic_indices=ic,
        ic_times=ic / rate,
        peak_g=np.array(peaks),
        step_lengths_m=lengths,
        total_distance_m=float(sum(lengths.tolist())),
        duration_s=float((ic[-1] - ic[0] + last_interval) / rate),
    )
    return series, truth


def generate_plan(plan: ActivityPlan, activity, seed=0) -> tuple[AccelSeries, SynthTruth]:
    return generate_activity(plan.profile, activity, plan.duration_s, plan.target_distance_m, seed)


# ---------------------------------------------------------------------------
# subjects and cohorts
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class SyntheticSubject:
    subject_id: str
    cohort: str
    series: dict[Activity, AccelSeries] = field(default_factory=dict)
    truth: dict[Activity, SynthTruth] = field(default_factory=dict)
    pedometer: dict[Activity, tuple[int, float]] = field(default_factory=dict)
    manifest_path: Optional[Path] = None

    def records(self):
        """In-memory :class:`~gaitcf.signal_io.ActivityRecord` list with series attached."""
        out = []
        for activity, truth in self.truth.items():
            steps, dist = self.pedometer.get(activity, (None, None))
            out.append(ActivityRecord(
                subject_id=self.subject_id,
                activity=activity,
                observed_distance_m=truth.total_distance_m,
                observed_steps=truth.step_count,
                observed_duration_s=truth.duration_s,
                pedometer_steps=steps,
                pedometer_distance_m=dist,
                cohort=self.cohort,
                series=self.series[activity],
            ))
        return out


def _pedometer(rng: np.random.Generator, truth: SynthTruth) -> tuple[int, float]:
    # built-in pedometers undercount badly across speeds; emulate a biased, noisy device
    factor_steps = max(0.05, rng.normal(0.6, 0.2))
    factor_dist = max(0.05, factor_steps * rng.normal(1.0, 0.15))
    return int(round(truth.step_count * factor_steps)), float(round(truth.total_distance_m * factor_dist, 6))


def simulate_subject(
    subject_id: str,
    morphology: str = TD_LIKE,
    seed=0,
    *,
    noise_snr_db: float = math.inf,
    randomize: bool = True,
    step_length_law: tuple[float, float] = (0.45, 0.5),
    activities: Sequence[Activity] = tuple(Activity),
) -> SyntheticSubject:
    """Generate the eight-activity protocol for one subject in memory."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    profile_rng, ped_rng = (np.random.default_rng(s) for s in ss.spawn(2))
    act_seeds = ss.spawn(len(Activity))
    cadence_scale = profile_rng.uniform(0.92, 1.08) if randomize else 1.0
    amplitude_scale = profile_rng.uniform(0.9, 1.1) if randomize else 1.0
    plans = subject_plans(
        morphology,
        cadence_scale=cadence_scale,
        amplitude_scale=amplitude_scale,
        step_length_law=step_length_law,
        noise_snr_db=noise_snr_db,
    )
    cohort = "DMD" if morphology == DMD_LIKE else "TD"
    subject = SyntheticSubject(subject_id, cohort)
    for activity, act_seed in zip(Activity, act_seeds):
        if activity not in activities:
            continue
        series, truth = generate_plan(plans[activity], activity, np.random.default_rng(act_seed))
        subject.series[activity] = series
        subject.truth[activity] = truth
        subject.pedometer[activity] = _pedometer(ped_rng, truth)
    return subject


def simulate_cohort(n_td: int, n_dmd: int, seed=0, **kwargs) -> list[SyntheticSubject]:
    seeds = np.random.SeedSequence(seed).spawn(n_td + n_dmd)
    subjects = []
    for k in range(n_td + n_dmd):
        td = k < n_td
        sid = f"TD{k + 1:02d}" if td else f"DMD{k - n_td + 1:02d}"
        subjects.append(simulate_subject(sid, TD_LIKE if td else DMD_LIKE, seeds[k], **kwargs))
    return subjects


def _observed(rng, truth: SynthTruth, observation_noise: float) -> tuple[float, int]:
    if observation_noise <= 0:
        return truth.total_distance_m, truth.step_count
    dist = truth.total_distance_m * (1.0 + observation_noise * rng.standard_normal())
    steps = int(round(truth.step_count * (1.0 + observation_noise * rng.standard_normal())))
    return round(max(dist, 0.0), 6), max(steps, 0)


def write_subject(subject: SyntheticSubject, out_dir, observation_noise: float = 0.0, seed=0) -> Path:
    """Write traces, ``manifest.yaml`` and ``truth.yaml`` under ``out_dir/<subject_id>``."""
    sdir = Path(out_dir) / subject.subject_id
    sdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    entries, truth_docs = [], []
    for activity, truth in subject.truth.items():
        trace_name = f"{activity.value}.csv"
        write_accel_csv(subject.series[activity], sdir / trace_name)
        dist, steps = _observed(rng, truth, observation_noise)
        ped_steps, ped_dist = subject.pedometer.get(activity, (None, None))
        entries.append({
            "activity": activity.value,
            "trace": trace_name,
            "observed_distance_m": dist,
            "observed_steps": steps,
            "observed_duration_s": truth.duration_s,
            "pedometer_steps": ped_steps,
            "pedometer_distance_m": ped_dist,
        })
        truth_docs.append(truth.to_document())
    write_yaml(manifest_document(subject.subject_id, entries, subject.cohort), sdir / "manifest.yaml")
    write_yaml({"subject_id": subject.subject_id, "cohort": subject.cohort, "activities": truth_docs},
               sdir / "truth.yaml")
    subject.manifest_path = sdir / "manifest.yaml"
    return subject.manifest_path


def generate_cohort(
    out_dir,
    n_td: int,
    n_dmd: int,
    seed: int = 0,
    *,
    noise_snr_db: float = math.inf,
    observation_noise: float = 0.0,
    force: bool = False,
    randomize: bool = True,
) -> list[SyntheticSubject]:
    """Write a synthetic cohort to ``out_dir``; refuses a non-empty directory unless ``force``."""
    out_dir = Path(out_dir)
    if out_dir.exists() and any(out_dir.iterdir()):
        if not force:
            raise OutputCollisionError(f"{out_dir} is not empty; pass force=True to overwrite")
        shutil.rmtree(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    subjects = simulate_cohort(n_td, n_dmd, seed, noise_snr_db=noise_snr_db, randomize=randomize)
    obs_seeds = np.random.SeedSequence([seed, 1]).spawn(len(subjects))
    for subject, s in zip(subjects, obs_seeds):
        write_subject(subject, out_dir, observation_noise, np.random.default_rng(s))
        logger.info("wrote %s (%s)", subject.subject_id, subject.cohort)
    return subjects


def load_truth(path) -> dict[Activity, SynthTruth]:
    with open(path, encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    return {Activity.parse(d["activity"]): SynthTruth.from_document(d) for d in doc["activities"]}


def with_snr(profile: GaitProfile, snr_db: float) -> GaitProfile:
    return replace(profile, noise_snr_db=snr_db)


__all__ = [
    "ActivityPlan", "CALIBRATION_ACTIVITIES", "DMD_AMPLITUDE_GAP", "DMD_LIKE", "GaitProfile",
    "SynthTruth", "SyntheticSubject", "TD_LIKE", "default_template", "generate_activity",
    "generate_cohort", "generate_plan", "load_template", "load_truth", "simulate_cohort",
    "simulate_subject", "subject_plans", "with_snr", "write_subject",
]
