import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

# three parameter points per base family: weak, moderate, strong
PARAM_GRID = {
    "N": [(-0.3,), (0.5,), (0.9,)],
    "t": [(-0.2, 4.0), (0.5, 8.0), (0.85, 3.0)],
    "C": [(0.3,), (2.0,), (6.0,)],
    "G": [(1.2,), (2.0,), (4.0,)],
    "F": [(-4.0,), (2.0,), (12.0,)],
    "BB1": [(0.3, 1.2), (1.0, 2.0), (2.0, 1.5)],
    "BB8": [(1.5, 0.7), (3.0, 0.9), (5.0, 0.5)],
}
REFLECTIONS = {"N": [""], "t": [""], "F": [""], "C": ["", "s", "u", "v"], "G": ["", "s", "u", "v"],
               "BB1": ["", "s", "u", "v"], "BB8": ["", "s", "u", "v"]}


def all_copulas():
    from vineinfer.copula import BivariateCopula, CopulaFamily

    out = []
    for kind, pars in PARAM_GRID.items():
        for refl in REFLECTIONS[kind]:
            for p in pars:
                out.append(BivariateCopula(CopulaFamily(kind, refl), p))
    return out


def copula_id(c):
    return f"{c.family.code}{c.theta}"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
