"""``gaitcf`` command line interface."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from collections import OrderedDict
from pathlib import Path

from . import __version__
from .calibration import RegressionForm, load_models, save_models
from .exceptions import GaitError
from .gaitmap import write_gaitmap_csv
from .metrics import build_report
from .pipeline import PipelineConfig, analyze_subject, calibrate_subject, detect_series, subject_gait_maps
from .preprocess import FilterSpec
from .signal_io import (
    DEFAULT_RATE_HZ,
    parse_accel_csv,
    parse_estimates_csv,
    parse_manifest,
    write_estimates_csv,
    write_events_csv,
    write_report,
)
from .step_detect import PeakParams
from .synth import generate_cohort

logger = logging.getLogger("gaitcf")

ESTIMATES_SUFFIX = "_estimates.csv"


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("signal conditioning and peak picking")
    g.add_argument("--cutoff-hz", type=float, default=3.0, help="low-pass cutoff (default 3 Hz)")
    g.add_argument("--filter-order", type=int, default=4, choices=(2, 4, 6, 8))
    g.add_argument("--no-zero-phase", action="store_true", help="single forward pass instead of forward-backward")
    g.add_argument("--min-separation-s", type=float, default=0.25)
    g.add_argument("--min-prominence-g", type=float, default=0.05)
    g.add_argument("--rate-hz", type=float, default=DEFAULT_RATE_HZ, help="nominal sampling rate")


def _config(args, form=RegressionForm.LINEAR) -> PipelineConfig:
    return PipelineConfig(
        FilterSpec(args.cutoff_hz, args.filter_order, not args.no_zero_phase),
        PeakParams(args.min_separation_s, args.min_prominence_g),
        RegressionForm.parse(form),
    )


def _by_subject(records) -> "OrderedDict[str, list]":
    groups: OrderedDict[str, list] = OrderedDict()
    for r in records:
        groups.setdefault(r.subject_id, []).append(r.load())
    return groups


def cmd_events(args) -> int:
    series = parse_accel_csv(args.trace, args.rate_hz)
    det = detect_series(series, _config(args))
    out = args.out or Path(args.trace).with_name(Path(args.trace).stem + "_events.csv")
    write_events_csv(det.event_rows(), out)
    logger.info("%d steps -> %s", det.step_count, out)
    return 0


def cmd_calibrate(args) -> int:
    config = _config(args, args.form)
    models = [calibrate_subject(recs, config)
              for recs in _by_subject(parse_manifest(args.manifest)).values()]
    save_models(models, args.out)
    for m in models:
        logger.info("%s: %s coefficients %s", m.subject_id, m.form.value, m.coefficients)
    return 0


def cmd_analyze(args) -> int:
    config = _config(args)
    models = load_models(args.model)
    out_dir = Path(args.out_dir)
    for subject, recs in _by_subject(parse_manifest(args.manifest)).items():
        model = models.get(subject)
        if model is None:
            if len(models) != 1:
                raise GaitError(f"no calibration model for subject {subject}")
            model = next(iter(models.values()))
            logger.warning("using model of %s for %s", model.subject_id, subject)
        analysis = analyze_subject(recs, model, config)
        write_estimates_csv(analysis.results, out_dir / f"{subject}{ESTIMATES_SUFFIX}")
        for activity, rows in analysis.events.items():
            write_events_csv(rows, out_dir / "events" / f"{subject}_{activity.value}.csv")
    return 0


def cmd_gaitmap(args) -> int:
    config = _config(args)
    maps = []
    for recs in _by_subject(parse_manifest(args.manifest)).values():
        maps.extend(subject_gait_maps(recs, config))
    write_gaitmap_csv(maps, args.out)
    return 0


def cmd_report(args) -> int:
    files = sorted(Path(args.results_dir).glob(f"*{ESTIMATES_SUFFIX}"))
    if not files:
        raise GaitError(f"no *{ESTIMATES_SUFFIX} files in {args.results_dir}")
    results = [r for f in files for r in parse_estimates_csv(f)]
    built = build_report(results, literal=args.literal_error_rate)
    write_report(built.rows, args.out)
    logger.info("%d rows, %d empty groups omitted, %d incomplete pairs skipped",
                len(built.rows), built.omitted_groups, built.missing_pairs)
    return 0


def cmd_synth(args) -> int:
    generate_cohort(
        args.out_dir, args.subjects_td, args.subjects_dmd, args.seed,
        noise_snr_db=args.snr_db, observation_noise=args.observation_noise, force=args.force,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS,
                        help="more logging (repeat for debug)")
    parser = argparse.ArgumentParser(prog="gaitcf", parents=[common],
                                     description="Gait features from a waist-worn accelerometer.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help):
        return sub.add_parser(name, help=help, parents=[common])

    p = add("events", "detect steps and gait events in one trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--out", help="events CSV (default: <trace>_events.csv)")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_events)

    p = add("calibrate", "fit per-subject step-length models")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--form", default="linear", choices=[f.value for f in RegressionForm])
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_calibrate)

    p = add("analyze", "estimate distance, cadence and speed per activity")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out-dir", required=True)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = add("gaitmap", "composite normalised step cycles")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_gaitmap)

    p = add("report", "agreement statistics over analysed results")
    p.add_argument("--results-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--literal-error-rate", action="store_true",
                   help="debug: evaluate the error rate with the outer absolute difference")
    p.set_defaults(func=cmd_report)

    p = add("synth", "write a synthetic cohort with ground truth")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--subjects-td", type=int, default=3)
    p.add_argument("--subjects-dmd", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--snr-db", type=float, default=math.inf)
    p.add_argument("--observation-noise", type=float, default=0.0,
                   help="relative SD of noise on the manifest's observed values")
    p.add_argument("--force", action="store_true", help="overwrite a non-empty output directory")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(getattr(args, "verbose", 0), 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (GaitError, OSError, ValueError) as exc:
        print(f"gaitcf {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
