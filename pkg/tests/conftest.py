import numpy as np
import pytest

from robfusion.grid import FunctionalSample, Grid, GridFunction


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_function(rng, t_count, scale=1.0):
    return GridFunction(Grid(t_count), scale * rng.standard_normal(t_count))


def unit_constant(t_count):
    # ||1||^2 = (1/T) * T = 1; dyadic values keep sums exact
    return GridFunction.constant(Grid(t_count), 1.0)


def sample_from_rows(rows):
    rows = np.asarray(rows, dtype=float)
    return FunctionalSample(Grid(rows.shape[1]), rows)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, msg in mod.RESULTS:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" -- {msg}" if msg else ""))
