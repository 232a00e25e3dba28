from pathlib import Path

import pytest

from coalgpart.encoding import parse_coalgebra, read_coalgebra

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def shapes():
    return read_coalgebra(DATA / "shapes.coalg")


@pytest.fixture
def nested():
    return read_coalgebra(DATA / "nested_powerset.coalg")


@pytest.fixture
def data_dir():
    return DATA


def names_of(enc, blocks):
    """Root-state partition as a set of frozensets of names."""
    out = set()
    for b in blocks:
        names = frozenset(enc.names[x] for x in b if x < enc.n_roots)
        if names:
            out.add(names)
    return out


def system(text):
    return parse_coalgebra(text)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
