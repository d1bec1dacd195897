import math

import numpy as np
import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from gaitcf.exceptions import (
    CompletenessError,
    EnumerationError,
    MissingTraceError,
    NonFiniteValueError,
    OrderingError,
    OutputError,
    TraceFormatError,
)
from gaitcf.metrics import MetricsReport
from gaitcf.signal_io import (
    AccelSeries,
    Activity,
    EventRow,
    fmt_real,
    format_p_value,
    manifest_document,
    parse_accel_csv,
    parse_events_csv,
    parse_manifest,
    parse_report,
    write_accel_csv,
    write_events_csv,
    write_report,
    write_yaml,
)


def _write(path, text):
    path.write_text(text, encoding="utf-8", newline="\n")
    return path


class TestAccelCsv:
    def test_three_zero_rows(self, tmp_path):
        p = _write(tmp_path / "a.csv", "t,x,y,z\n0.00,0,0,0\n0.01,0,0,0\n0.02,0,0,0\n")
        s = parse_accel_csv(p)
        assert len(s) == 3
        for ch in (s.x, s.y, s.z):
            assert np.all(ch == 0)

    def test_ordering_error_reports_row(self, tmp_path):
        p = _write(tmp_path / "a.csv", "t,x,y,z\n0.00,0,0,0\n0.02,0,0,0\n0.01,0,0,0\n")
        with pytest.raises(OrderingError) as exc:
            parse_accel_csv(p)
        assert exc.value.row == 3

    def test_390_samples_round_trip(self, tmp_path):
        n = 390
        t = np.arange(n) / 100.0
        rng = np.random.default_rng(0)
        s = AccelSeries(t, rng.normal(size=n), rng.normal(size=n), rng.normal(size=n))
        write_accel_csv(s, tmp_path / "a.csv")
        back = parse_accel_csv(tmp_path / "a.csv")
        assert len(back) == n
        assert back.duration_s == pytest.approx(3.89, abs=1e-9)
        assert back.median_interval_s == pytest.approx(0.01, abs=1e-9)
        assert not back.is_irregular
        np.testing.assert_allclose(back.z, s.z, atol=5e-7)

    @pytest.mark.parametrize("header", ["t,x,y\n", "time,x,y,z\n", ""])
    def test_bad_header(self, tmp_path, header):
        p = _write(tmp_path / "a.csv", header + "0,0,0,0\n")
        with pytest.raises(TraceFormatError):
            parse_accel_csv(p)

    def test_garbled_row(self, tmp_path):
        p = _write(tmp_path / "a.csv", "t,x,y,z\n0,0,0,0\n0.01,abc,0,0\n")
        with pytest.raises(TraceFormatError):
            parse_accel_csv(p)

    @pytest.mark.parametrize("value", ["nan", "inf", "-inf"])
    def test_non_finite(self, tmp_path, value):
        p = _write(tmp_path / "a.csv", f"t,x,y,z\n0,0,0,0\n0.01,0,{value},0\n")
        with pytest.raises(NonFiniteValueError):
            parse_accel_csv(p)

    def test_negative_time(self):
        with pytest.raises(NonFiniteValueError):
            AccelSeries([-0.01, 0.0], [0, 0], [0, 0], [0, 0])

    def test_irregular_flag(self):
        t = np.arange(10) * 0.013
        s = AccelSeries(t, t, t, t)
        assert s.is_irregular
        assert not AccelSeries(t, t, t, t, nominal_rate_hz=1 / 0.013).is_irregular

    def test_arrays_are_read_only(self):
        s = AccelSeries([0, 0.01], [0, 0], [0, 0], [1, 2])
        with pytest.raises(ValueError):
            s.z[0] = 5.0

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-16, 16, allow_nan=False), min_size=2, max_size=60))
    def test_no_rows_dropped(self, tmp_path_factory, values):
        path = tmp_path_factory.mktemp("p") / "a.csv"
        v = np.array(values)
        t = np.arange(v.size) / 100.0
        write_accel_csv(AccelSeries(t, v, -v, v * 0.5), path)
        back = parse_accel_csv(path)
        assert len(back) == v.size
        np.testing.assert_allclose(back.x, v, atol=5e-7)


def _entries(**overrides):
    out = []
    for a in Activity:
        e = {
            "activity": a.value, "trace": f"{a.value}.csv", "observed_distance_m": 25.0,
            "observed_steps": 30, "observed_duration_s": 12.0, "pedometer_steps": 20,
            "pedometer_distance_m": 18.0,
        }
        e.update(overrides.get(a.value, {}))
        out.append(e)
    return out


def _manifest(tmp_path, entries, cohort="TD"):
    for e in entries:
        _write(tmp_path / e["trace"], "t,x,y,z\n0,0,0,0\n0.01,0,0,0\n")
    write_yaml(manifest_document("S1", entries, cohort), tmp_path / "m.yaml")
    return tmp_path / "m.yaml"


class TestManifest:
    def test_eight_records(self, tmp_path):
        recs = parse_manifest(_manifest(tmp_path, _entries()))
        assert [r.activity for r in recs] == list(Activity)
        assert all(r.trace_path.is_file() for r in recs)
        assert recs[0].cohort == "TD" and recs[0].observed_steps == 30
        loaded = recs[0].load()
        assert len(loaded.series) == 2

    def test_missing_steps_names_activity(self, tmp_path):
        entries = _entries()
        del entries[2]["observed_steps"]
        with pytest.raises(CompletenessError, match="SC-L3"):
            parse_manifest(_manifest(tmp_path, entries))

    def test_unknown_activity(self, tmp_path):
        entries = _entries()
        entries[0]["activity"] = "SC-L9"
        with pytest.raises(EnumerationError):
            parse_manifest(_manifest(tmp_path, entries))

    def test_evaluation_activity_may_lack_truth(self, tmp_path):
        entries = _entries()
        del entries[7]["observed_steps"]
        recs = parse_manifest(_manifest(tmp_path, entries))
        assert recs[7].observed_steps is None and not recs[7].has_ground_truth

    def test_missing_trace(self, tmp_path):
        path = _manifest(tmp_path, _entries())
        (tmp_path / "FW.csv").unlink()
        with pytest.raises(MissingTraceError):
            parse_manifest(path)
        assert len(parse_manifest(path, check_traces=False)) == 8

    def test_multi_document(self, tmp_path):
        _manifest(tmp_path, _entries())
        docs = [manifest_document(s, _entries(), "DMD") for s in ("A", "B")]
        (tmp_path / "two.yaml").write_text(yaml.safe_dump_all(docs), encoding="utf-8")
        recs = parse_manifest(tmp_path / "two.yaml")
        assert [r.subject_id for r in recs] == ["A"] * 8 + ["B"] * 8

    def test_alias_labels(self):
        assert Activity.parse("SixMWT") is Activity.SIX_MWT
        assert Activity.parse("hundredmrw") is Activity.HUNDRED_MRW
        assert Activity.parse(" sc-l2 ") is Activity.SC_L2


class TestEventsCsv:
    def test_empty_is_header_only(self, tmp_path):
        write_events_csv([], tmp_path / "e.csv")
        assert (tmp_path / "e.csv").read_bytes() == b"step_index,start_t,to_t,ic_t,end_t,ic_peak_g,step_length_m\n"

    def test_round_trip(self, tmp_path):
        rows = [EventRow(0, 1.0, 1.0, 1.25, 1.5, 0.812345, None),
                EventRow(1, 1.5, 1.5, 1.74, 2.01, 0.7, 0.81)]
        write_events_csv(rows, tmp_path / "e.csv")
        text = (tmp_path / "e.csv").read_text()
        assert "0,1.000000,1.000000,1.250000,1.500000,0.812345,\n" in text
        assert parse_events_csv(tmp_path / "e.csv") == rows


def _report_row(**kw):
    base = dict(activity_set="All", cohort="All", source="System", quantity="Steps", n_pairs=4,
                gt_total=400.0, error_rate_pct=3.456789, mean_pct_error=-1.0, sd_pct_error=2.0,
                pearson_r=0.99, p_value=1e-20, adjusted_r2=0.98, n_excluded=0)
    base.update(kw)
    return MetricsReport(**base)


class TestReportCsv:
    def test_formatting_and_determinism(self, tmp_path):
        rows = [_report_row(), _report_row(quantity="Distance", p_value=0.0123, pearson_r=None)]
        write_report(rows, tmp_path / "a.csv")
        write_report(rows, tmp_path / "b.csv")
        a = (tmp_path / "a.csv").read_bytes()
        assert a == (tmp_path / "b.csv").read_bytes()
        line = a.decode().splitlines()[1]
        assert ",3.456789," in line and ",<1e-15," in line
        assert b"\r" not in a

    def test_round_trip(self, tmp_path):
        rows = [_report_row(p_value=0.0123), _report_row(adjusted_r2=None, n_excluded=2, p_value=0.5)]
        write_report(rows, tmp_path / "r.csv")
        assert parse_report(tmp_path / "r.csv") == rows

    def test_p_below_floor_reads_back_as_zero(self, tmp_path):
        write_report([_report_row(p_value=1e-20)], tmp_path / "r.csv")
        assert parse_report(tmp_path / "r.csv")[0].p_value == 0.0

    def test_p_value_floor(self):
        assert format_p_value(0.0) == "<1e-15"
        assert format_p_value(2e-15) == "2.000000e-15"
        assert format_p_value(None) == ""

    def test_unwritable_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OutputError, match=str(blocker)):
            write_report([_report_row()], blocker / "sub" / "r.csv")


def test_fmt_real():
    assert fmt_real(3.456789) == "3.456789"
    assert fmt_real(-0.0000001) == "0.000000"
    assert fmt_real(None) == "" and fmt_real(math.nan) == ""
