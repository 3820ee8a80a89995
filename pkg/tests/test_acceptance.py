"""Acceptance gate: every criterion at its stated tolerance, seed 0.

The whole suite runs once per session; each criterion is its own test and
its PASS/FAIL line is listed in the terminal summary.
"""
import pytest

from conftest import ACCEPTANCE_LINES
from deeponet_rates.acceptance import CRITERIA, run_acceptance

NUMBERS = [number for number, _, _ in CRITERIA]


@pytest.fixture(scope="module")
def results(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance")
    res = run_acceptance(str(out), seed=0, threads=1, echo=ACCEPTANCE_LINES.append)
    return {r.number: r for r in res}


def test_twelve_criteria():
    assert NUMBERS == list(range(1, 13))


@pytest.mark.parametrize("number", NUMBERS)
def test_criterion(results, number):
    r = results[number]
    assert r.passed, r.line()
