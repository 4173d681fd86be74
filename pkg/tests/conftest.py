import time

import pytest

from tfm_lab.regression import run_paper_suite
from tfm_lab.scenarios import grid_scenarios

_TIMING: dict[str, float] = {}


@pytest.fixture(scope="session")
def grid():
    return grid_scenarios()


@pytest.fixture(scope="session")
def suite_report(grid):
    # one full claim-suite run shared by the regression and acceptance tests
    start = time.perf_counter()
    report = run_paper_suite(None, grid)
    _TIMING["suite_seconds"] = time.perf_counter() - start
    return report


@pytest.fixture(scope="session")
def suite_timing():
    return _TIMING


@pytest.fixture
def announce(capsys):
    """Print a line that survives pytest's capture (acceptance verdicts)."""
    def _print(line: str) -> None:
        with capsys.disabled():
            print(line)
    return _print
