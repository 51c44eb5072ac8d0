import sys
import time

import numpy as np
import pytest

from collapse_lab import DensityMatrix, Observable


def random_hermitian(rng, d, scale=1.0):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (g + g.conj().T) / 2


def random_state(rng, d, rank=None):
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_observable(rng, d):
    return Observable(random_hermitian(rng, d))


def taylor_exp(a, terms):
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


SUITE_BUDGET = 60.0
_session = {}


def pytest_sessionstart(session):
    _session["start"] = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _session["start"]
    _session["elapsed"] = elapsed
    acceptance = sys.modules.get("test_acceptance")
    # the runtime budget only applies when the whole suite ran
    if acceptance is not None and session.testscollected > 100 and elapsed >= SUITE_BUDGET:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.RESULTS[n])
    if terminalreporter._session.testscollected > 100:
        elapsed = _session.get("elapsed", time.perf_counter() - _session["start"])
        verdict = "PASS" if elapsed < SUITE_BUDGET else "FAIL"
        terminalreporter.write_line(f"criterion 8: {verdict}  full suite wall time {elapsed:.1f} s (budget {SUITE_BUDGET:.0f} s)")
