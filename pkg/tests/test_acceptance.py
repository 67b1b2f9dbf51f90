"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line."""
import pytest

from liouville_bubbles import verification


@pytest.mark.parametrize("name", verification.ACCEPTANCE)
def test_acceptance(name, capsys):
    result, timing = verification.run_checks([name])
    r = result[0]
    with capsys.disabled():
        print(f"\n{r.line()}  [{timing[name]:.1f} s]")
    assert r.passed, r.metrics
