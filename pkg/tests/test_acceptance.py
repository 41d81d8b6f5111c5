"""Acceptance criteria 1 to 13, one pass/fail line each.

Each criterion runs through the same registry the ``verify`` subcommand
uses, at the stated tolerances and time budgets.  The lines are collected
and printed together in the terminal summary at the end of the run.
"""

import pytest

from conftest import ACCEPTANCE_LINES
from fraclattice.verify import CRITERIA, run_checks


@pytest.mark.parametrize("crit", CRITERIA, ids=lambda c: f"{c.number:02d}-{c.name}")
def test_criterion(crit):
    (result,) = run_checks(only=[str(crit.number)])
    print(result.line())
    ACCEPTANCE_LINES.append(result.line())
    assert result.passed, result.line()
