import numpy as np
import pytest

from gaitcf.signal_io import AccelSeries
from gaitcf.synth import simulate_cohort

COHORT_SEED = 7


def pytest_configure(config):
    config._criteria = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_criteria", [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines):
        terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""
    lines = request.config._criteria

    def record(number: int, name: str, passed: bool, detail: str = ""):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {name}"
        if detail:
            line += f"  [{detail}]"
        lines.append(line)
        print(line)
        return passed

    return record


def ap_series(v, rate_hz=100.0, t0=0.0) -> AccelSeries:
    v = np.asarray(v, dtype=float)
    t = t0 + np.arange(v.size) / rate_hz
    zeros = np.zeros_like(v)
    return AccelSeries(t, zeros, zeros, v, nominal_rate_hz=rate_hz)


@pytest.fixture(scope="session")
def clean_cohort():
    return simulate_cohort(3, 3, seed=COHORT_SEED)


@pytest.fixture(scope="session")
def noisy_cohort():
    return simulate_cohort(3, 3, seed=COHORT_SEED, noise_snr_db=20.0)
