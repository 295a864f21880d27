"""Every acceptance criterion at its stated size and tolerance.

Each test prints one pass/fail line and the lines are repeated in the
terminal summary.  Failures are real results, not skips.
"""
import pytest

from localmajority.acceptance import CRITERIA

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    res = CRITERIA[number]()
    line = res.line()
    ACCEPTANCE_LINES.append(line)
    with capsys.disabled():
        print("\n" + line)
    assert res.passed, line


def test_over_budget_is_a_failure():
    from localmajority.acceptance import CriterionResult, _timed

    @_timed(0.0)
    def slow():
        return CriterionResult(0, "stand-in", True, "ok")

    res = slow()
    assert not res.passed and "OVER BUDGET" in res.line()
