from fractions import Fraction
from pathlib import Path

import pytest

from twdiag.matrix import load_matrix
from twdiag.treedecomp import NiceTreeDecomposition, load_td

DATA = Path(__file__).parent / "data"

# filled by test_acceptance, reported at the end of the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def example_matrix():
    return load_matrix(DATA / "example.mtx")


@pytest.fixture
def example_td():
    return NiceTreeDecomposition.from_tree(load_td(DATA / "example.td"))


def fr(*xs):
    return [Fraction(x) for x in xs]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
