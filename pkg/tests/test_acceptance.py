"""All eleven acceptance criteria at their stated tolerances, plus mutation checks.

Each criterion prints one ``[PASS]``/``[FAIL]`` line; the lines are also
collected into a summary section at the end of the pytest run.
"""

import numpy as np
import pytest

from tiltedchsh import acceptance, closed_form

from .conftest import record_acceptance

SLOW = {6, 8, 9}


@pytest.mark.parametrize(
    "check",
    [pytest.param(c, marks=pytest.mark.slow) if c.number in SLOW else c for c in acceptance.CRITERIA],
    ids=[f"{c.number:02d}-{c.title}" for c in acceptance.CRITERIA],
)
def test_criterion(check):
    result = check()
    line = result.line()
    print(line)
    record_acceptance(line)
    assert result.passed, line


def test_all_eleven_present():
    assert [c.number for c in acceptance.CRITERIA] == list(range(1, 12))


def test_tampered_degree6_coefficient_is_caught(monkeypatch):
    original = closed_form.tau_coefficients

    def tampered(alpha, beta):
        tau = original(alpha, beta)
        tau[4] += 1e-3
        return tau

    monkeypatch.setattr(closed_form, "tau_coefficients", tampered)
    assert not acceptance.degree_consistency().passed


@pytest.mark.slow
def test_loose_solver_tolerance_is_flagged():
    result = acceptance.npa_soundness(acceptance.Settings(sdp_tol=1e-2))
    assert not result.passed, result.line()


def test_runtime_budget_enforced(monkeypatch):
    clock = iter(np.arange(0.0, 100.0, 50.0))
    monkeypatch.setattr(acceptance.time, "perf_counter", lambda: next(clock))
    result = acceptance.tsirelson_recovery()
    assert not result.passed and "over budget" in result.detail
