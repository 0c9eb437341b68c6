import numpy as np
import pytest
from hypothesis import settings, strategies as st

# numba compiles on first call, so the first example of a property can be slow
settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def _unit(vals):
    a = np.array(vals, dtype=float)
    return a / np.linalg.norm(a)


coords = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)
unit_vectors = st.tuples(coords, coords, coords).filter(
    lambda t: np.linalg.norm(t) > 0.1).map(_unit)
vectors = st.tuples(coords, coords, coords).map(lambda t: np.array(t, dtype=float))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed after the test run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
