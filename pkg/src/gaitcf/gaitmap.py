"""Step cycles normalised to 0-100 % and their composite averages."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .exceptions import EmptyInputError, ShortCycleError
from .signal_io import Activity, fmt_real, write_csv
from .step_detect import StepSegment

logger = logging.getLogger(__name__)

N_PHASE = 101
MIN_CYCLE_SAMPLES = 4
ALL_ACTIVITIES = "ALL"


@dataclass(frozen=True, eq=False)
class NormalizedCycle:
    subject_id: str
    activity: Optional[Activity]
    step_index: int
    samples: np.ndarray


@dataclass(frozen=True, eq=False)
class CompositeMap:
    subject_id: str
    activity: str  # activity label or ALL_ACTIVITIES
    mean_cycle: np.ndarray
    sd_cycle: np.ndarray  # population SD
    n_cycles: int


def normalize_cycle(raw_ap, ic_idx_start: int, ic_idx_end: int, *, subject_id: str = "",
                    activity: Optional[Activity] = None, step_index: int = 0) -> NormalizedCycle:
    """Resample the IC-to-IC stretch of ``raw_ap`` onto 101 phase points."""
    span = ic_idx_end - ic_idx_start
    if span < MIN_CYCLE_SAMPLES:
        raise ShortCycleError(f"cycle of {span} samples is shorter than {MIN_CYCLE_SAMPLES}")
    raw = np.asarray(raw_ap, dtype=float)
    pos = ic_idx_start + span * np.arange(N_PHASE) / (N_PHASE - 1)
    pos[-1] = ic_idx_end
    idx = np.arange(ic_idx_start, ic_idx_end + 1)
    samples = np.interp(pos, idx, raw[ic_idx_start:ic_idx_end + 1])
    samples.setflags(write=False)
    return NormalizedCycle(subject_id, activity, step_index, samples)


def cycles_from_segments(raw_ap, segments: Sequence[StepSegment], *, subject_id: str = "",
                         activity: Optional[Activity] = None) -> tuple[list[NormalizedCycle], int]:
    """Normalise every consecutive IC pair; returns the cycles and the count skipped as too short."""
    cycles, skipped = [], 0
    for a, b in zip(segments, segments[1:]):
        try:
            cycles.append(normalize_cycle(raw_ap, a.ic_idx, b.ic_idx, subject_id=subject_id,
                                          activity=activity, step_index=a.index))
        except ShortCycleError:
            skipped += 1
    if skipped:
        logger.info("%s %s: skipped %d short cycles", subject_id, activity, skipped)
    return cycles, skipped


def composite(cycles: Sequence[NormalizedCycle], subject_id: Optional[str] = None,
              activity: Optional[str] = None) -> CompositeMap:
    """Pointwise mean and population SD of the cycles."""
    if not cycles:
        raise EmptyInputError("composite of no cycles")
    stack = np.vstack([c.samples for c in cycles])
    if subject_id is None:
        subject_id = cycles[0].subject_id
    if activity is None:
        acts = {c.activity for c in cycles}
        activity = str(acts.pop()) if len(acts) == 1 and None not in acts else ALL_ACTIVITIES
    return CompositeMap(subject_id, activity, stack.mean(axis=0), stack.std(axis=0), len(cycles))


def merge_composites(maps: Sequence[CompositeMap], subject_id: Optional[str] = None,
                     activity: str = ALL_ACTIVITIES) -> CompositeMap:
    """Combine composites of disjoint cycle sets as if built from their union."""
    if not maps:
        raise EmptyInputError("merge of no composites")
    n = np.array([m.n_cycles for m in maps], dtype=float)
    means = np.vstack([m.mean_cycle for m in maps])
    sds = np.vstack([m.sd_cycle for m in maps])
    total = n.sum()
    mean = (n[:, None] * means).sum(axis=0) / total
    second = (n[:, None] * (sds ** 2 + means ** 2)).sum(axis=0) / total
    sd = np.sqrt(np.maximum(second - mean ** 2, 0.0))
    return CompositeMap(subject_id or maps[0].subject_id, activity, mean, sd, int(total))


GAITMAP_HEADER = ("subject_id", "activity", "phase_pct", "mean_g", "sd_g", "n_cycles")


def write_gaitmap_csv(maps: Iterable[CompositeMap], path) -> None:
    rows = (
        (m.subject_id, m.activity, str(k), fmt_real(m.mean_cycle[k]), fmt_real(m.sd_cycle[k]), str(m.n_cycles))
        for m in maps
        for k in range(N_PHASE)
    )
    write_csv(path, GAITMAP_HEADER, rows)
