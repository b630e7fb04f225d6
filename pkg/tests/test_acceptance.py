"""All ten acceptance criteria at their stated tolerances; one line per criterion."""

import pytest

from axidirect import acceptance


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number, capsys):
    res = acceptance.run(number)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()
