from __future__ import annotations

import pytest

from twbn.scores import parse_scores

I0_TEXT = """\
3
x 2
0.0 0
4.0 1 y
y 2
0.0 0
3.0 1 x
z 2
0.0 0
2.0 1 y
"""

X, Y, Z = 0, 1, 2


@pytest.fixture
def i0():
    return parse_scores(I0_TEXT)


@pytest.fixture
def i0_file(tmp_path):
    path = tmp_path / "i0.scores"
    path.write_text(I0_TEXT)
    return path


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
