from fractions import Fraction

import pytest
from hypothesis import strategies as st

from projconv.algebra import Mat2, MatrixSystem, Vec2


def mat(rows):
    return Mat2.of(rows)


def system(mats, V):
    return MatrixSystem(tuple(Mat2.of(m) for m in mats), Vec2(*V))


@pytest.fixture
def make_system():
    return system


entries = st.fractions(min_value=0, max_value=20, max_denominator=6)
matrices = st.builds(Mat2, entries, entries, entries, entries)
vectors = st.tuples(entries, entries).filter(lambda v: v != (0, 0)).map(lambda v: Vec2(*v))
positive_scalars = st.fractions(min_value=Fraction(1, 7), max_value=9, max_denominator=7).filter(lambda x: x > 0)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
