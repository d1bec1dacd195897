"""Agreement statistics between estimates and ground truth.

* aggregate error rate: ``100 * sum|Vc - Vo| / sum|Vo|`` over a group of pairs
* per-pair signed percentage error ``100 * (Vc - Vo) / Vo`` with mean and
  sample SD
* Pearson r with a two-sided Student-t p-value
* adjusted R^2 of estimates against observations
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np
from scipy import special

from .exceptions import (
    DegenerateDenominatorError,
    EmptyInputError,
    UndefinedCorrelationError,
)
from .signal_io import Activity, CALIBRATION_ACTIVITIES, EVALUATION_ACTIVITIES

P_FLOOR = 1e-15


class Quantity(str, enum.Enum):
    STEPS = "Steps"
    DISTANCE = "Distance"
    STEP_LENGTH = "StepLength"


class Source(str, enum.Enum):
    SYSTEM = "System"
    PEDOMETER = "Pedometer"


@dataclass(frozen=True)
class EstimatePair:
    subject_id: str
    activity: Activity
    quantity: Quantity
    v_o: float
    v_c: float
    source: Source = Source.SYSTEM
    cohort: Optional[str] = None


@dataclass(frozen=True)
class MetricsReport:
    activity_set: str
    cohort: str
    source: str
    quantity: str
    n_pairs: int
    gt_total: Optional[float]
    error_rate_pct: Optional[float]
    mean_pct_error: Optional[float]
    sd_pct_error: Optional[float]
    pearson_r: Optional[float]
    p_value: Optional[float]
    adjusted_r2: Optional[float]
    n_excluded: int = 0


class MeanSD(NamedTuple):
    mean: float
    sd: float
    single: bool  # n == 1, SD reported as 0


class PearsonResult(NamedTuple):
    r: float
    p_value: float

    @property
    def p_below_floor(self) -> bool:
        return self.p_value < P_FLOOR


# ---------------------------------------------------------------------------
# scalar statistics
# ---------------------------------------------------------------------------

def error_rate_values(v_o, v_c, *, literal: bool = False) -> float:
    """Aggregate error rate in percent.

    ``literal=True`` evaluates ``|sum|Vc-Vo| - sum|Vo|| / sum|Vo| * 100``
    instead, which is near 100 for a good estimator; kept for auditing only.
    """
    v_o = np.asarray(v_o, dtype=float)
    v_c = np.asarray(v_c, dtype=float)
    if v_o.size == 0:
        raise EmptyInputError("error rate of no pairs")
    denom = float(np.sum(np.abs(v_o)))
    if denom == 0:
        raise DegenerateDenominatorError("sum of |observed| is zero")
    resid = float(np.sum(np.abs(v_c - v_o)))
    if literal:
        return abs(resid - denom) / denom * 100.0
    return resid / denom * 100.0


def error_rate(pairs: Sequence[EstimatePair], *, literal: bool = False) -> float:
    if not pairs:
        raise EmptyInputError("error rate of no pairs")
    if len({(p.quantity, p.source) for p in pairs}) > 1:
        raise ValueError("error_rate pairs must share quantity and source")
    return error_rate_values([p.v_o for p in pairs], [p.v_c for p in pairs], literal=literal)


def pct_error(pair: EstimatePair) -> float:
    """Signed percentage error; overestimates are positive."""
    if not pair.v_o > 0:
        raise ValueError(f"percentage error undefined for observed value {pair.v_o}")
    return 100.0 * (pair.v_c - pair.v_o) / pair.v_o


def pct_errors(pairs: Iterable[EstimatePair]) -> tuple[list[float], int]:
    """Percentage errors of all pairs with positive truth, and the count excluded."""
    out, excluded = [], 0
    for p in pairs:
        if p.v_o > 0:
            out.append(pct_error(p))
        else:
            excluded += 1
    return out, excluded


def mean_sd(values) -> MeanSD:
    """Arithmetic mean and sample (n-1) standard deviation."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise EmptyInputError("mean of no values")
    if v.size == 1:
        return MeanSD(float(v[0]), 0.0, True)
    return MeanSD(float(v.mean()), float(v.std(ddof=1)), False)


def pearson(v_o, v_c) -> PearsonResult:
    """Sample correlation and two-sided p-value.

    The p-value is the Student-t tail with ``n - 2`` degrees of freedom,
    written as a regularised incomplete beta:
    ``p = I_{df / (df + t^2)}(df / 2, 1 / 2)``.
    """
    x = np.asarray(v_o, dtype=float)
    y = np.asarray(v_c, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson needs two 1-D sequences of equal length")
    n = x.size
    if n < 3:
        raise UndefinedCorrelationError(f"need at least 3 pairs, got {n}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelationError("zero variance")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    df = n - 2
    one_minus = 1.0 - r * r
    if one_minus <= 0:
        return PearsonResult(r, 0.0)
    t2 = r * r * df / one_minus
    p = float(special.betainc(df / 2.0, 0.5, df / (df + t2)))
    return PearsonResult(r, min(max(p, 0.0), 1.0))


def adjusted_r2(observed, predicted, k: int = 1) -> float:
    """``1 - (1 - R^2)(n - 1)/(n - k - 1)`` with ``R^2 = 1 - SSres/SStot``."""
    y = np.asarray(observed, dtype=float)
    f = np.asarray(predicted, dtype=float)
    n = y.size
    if n <= k + 1:
        raise ValueError(f"adjusted R^2 needs n > k + 1 (n={n}, k={k})")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0:
        raise UndefinedCorrelationError("observed values have zero variance")
    ss_res = float(np.sum((y - f) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    return 1.0 - (1.0 - r2) * (n - 1) / (n - k - 1)


# ---------------------------------------------------------------------------
# report building
# ---------------------------------------------------------------------------

def pairs_from_results(results) -> tuple[list[EstimatePair], int]:
    """Turn :class:`~gaitcf.estimate.ActivityResult` rows into estimate pairs.

    Pairs with a missing value on either side are skipped and counted.
    """
    pairs, missing = [], 0

    def add(r, quantity, source, v_o, v_c):
        nonlocal missing
        if v_o is None or v_c is None:
            missing += 1
            return
        pairs.append(EstimatePair(r.subject_id, r.activity, quantity, float(v_o), float(v_c),
                                  source, r.cohort))

    for r in results:
        e = r.estimate
        obs_len = (r.observed_distance_m / r.observed_steps
                   if r.observed_distance_m is not None and r.observed_steps else None)
        ped_len = (r.pedometer_distance_m / r.pedometer_steps
                   if r.pedometer_distance_m is not None and r.pedometer_steps else None)
        add(r, Quantity.STEPS, Source.SYSTEM, r.observed_steps, e.step_count)
        add(r, Quantity.DISTANCE, Source.SYSTEM, r.observed_distance_m, e.distance_m)
        add(r, Quantity.STEP_LENGTH, Source.SYSTEM, obs_len, e.avg_step_length_m)
        add(r, Quantity.STEPS, Source.PEDOMETER, r.observed_steps, r.pedometer_steps)
        add(r, Quantity.DISTANCE, Source.PEDOMETER, r.observed_distance_m, r.pedometer_distance_m)
        add(r, Quantity.STEP_LENGTH, Source.PEDOMETER, obs_len, ped_len)
    return pairs, missing


CALIBRATION_SET = "SC-L1..SC-L5"
EVALUATION_SET = "6MWT+100MRW+FW"
ALL_SET = "All"

DEFAULT_ACTIVITY_SETS: tuple[tuple[str, frozenset], ...] = (
    *((a.value, frozenset([a])) for a in CALIBRATION_ACTIVITIES),
    (CALIBRATION_SET, frozenset(CALIBRATION_ACTIVITIES)),
    *((a.value, frozenset([a])) for a in EVALUATION_ACTIVITIES),
    (EVALUATION_SET, frozenset(EVALUATION_ACTIVITIES)),
    (ALL_SET, frozenset(Activity)),
)
DEFAULT_COHORTS = ("TD", "DMD", "All")


def summarize(pairs: Sequence[EstimatePair], *, activity_set: str = ALL_SET, cohort: str = "All",
              n_excluded: int = 0, literal: bool = False) -> MetricsReport:
    """All metrics for one homogeneous group of pairs; undefined ones are None."""
    if not pairs:
        raise EmptyInputError("empty group")
    quantity, source = pairs[0].quantity, pairs[0].source
    v_o = np.array([p.v_o for p in pairs])
    v_c = np.array([p.v_c for p in pairs])
    pcts, excluded = pct_errors(pairs)

    try:
        rate = error_rate(pairs, literal=literal)
    except DegenerateDenominatorError:
        rate = None
    stats = mean_sd(pcts) if pcts else None
    try:
        r, p = pearson(v_o, v_c)
    except UndefinedCorrelationError:
        r = p = None
    try:
        adj = adjusted_r2(v_o, v_c, k=1)
    except (ValueError, UndefinedCorrelationError):
        adj = None
    return MetricsReport(
        activity_set=activity_set,
        cohort=cohort,
        source=source.value,
        quantity=quantity.value,
        n_pairs=len(pairs),
        gt_total=float(v_o.sum()),
        error_rate_pct=rate,
        mean_pct_error=stats.mean if stats else None,
        sd_pct_error=stats.sd if stats else None,
        pearson_r=r,
        p_value=p,
        adjusted_r2=adj,
        n_excluded=n_excluded + excluded,
    )


@dataclass(frozen=True)
class ReportBuild:
    rows: list[MetricsReport]
    omitted_groups: int
    missing_pairs: int


def build_report(results, activity_sets=DEFAULT_ACTIVITY_SETS, cohorts=DEFAULT_COHORTS,
                 *, literal: bool = False) -> ReportBuild:
    """Metric rows for every (activity set, cohort, source, quantity) group.

    Row order follows ``activity_sets``, then ``cohorts``, then System before
    Pedometer, then Steps, Distance, StepLength. Groups without pairs are
    omitted and counted in ``omitted_groups``.
    """
    pairs, missing = pairs_from_results(results)
    rows, omitted = [], 0
    for set_name, members in activity_sets:
        for cohort in cohorts:
            for source in Source:
                for quantity in Quantity:
                    group = [
                        p for p in pairs
                        if p.activity in members and p.source is source and p.quantity is quantity
                        and (cohort == "All" or p.cohort == cohort)
                    ]
                    if not group:
                        omitted += 1
                        continue
                    rows.append(summarize(group, activity_set=set_name, cohort=cohort, literal=literal))
    return ReportBuild(rows, omitted, missing)
