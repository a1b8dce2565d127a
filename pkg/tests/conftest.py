import sys
from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).resolve().parent / "fixtures"
sys.path.insert(0, str(FIXTURES))

from regdepth.core import Dataset, read_csv  # noqa: E402


def load(name: str) -> Dataset:
    return read_csv(FIXTURES / name)


@pytest.fixture
def four():
    return load("four_point.csv")


def random_dataset(rng, n, p, ties=False):
    """Gaussian data; with ``ties`` the coordinates are rounded so that
    repeated x values and zero residuals occur."""
    Z = rng.standard_normal((n, p))
    if ties:
        Z = np.round(Z * 2) / 2
    return Dataset(Z[:, :-1], Z[:, -1])


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
