"""The four five-dimensional synthetic scenarios (two vines times two margin types)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import InputError
from ..fit import VineModel
from ..infer import rosenblatt_simulate
from ..margins.pipeline import LogNormalMargin, NormalMargin, ParametricMargins
from ..vine import validate_array

__all__ = ["Scenario", "get_scenario", "generate_scenario", "SCENARIO_ARRAY"]

SCENARIO_ARRAY = (
    (1, 1, 2, 2, 3),
    (0, 2, 1, 3, 2),
    (0, 0, 3, 1, 4),
    (0, 0, 0, 4, 1),
    (0, 0, 0, 0, 5),
)

_F1 = (
    (None, "N", "N", "N", "N"),
    (None, None, "N", "N", "N"),
    (None, None, None, "N", "N"),
    (None, None, None, None, "N"),
)
_P1 = (
    (None, 0.8, 0.6, 0.5, 0.7),
    (None, None, 0.4, 0.5, 0.3),
    (None, None, None, 0.3, 0.2),
    (None, None, None, None, 0.1),
)
_F2 = (
    (None, "t", "t", "BB1", "BB1"),
    (None, None, "F", "F", "N"),
    (None, None, None, "G", "N"),
    (None, None, None, None, "F"),
)
# A pair "x (y)" in the source table is read as the family's two parameters in order.
_P2 = (
    (None, (0.7, 5.0), (0.8, 4.0), (1.0, 2.0), (2.0, 1.5)),
    (None, None, 3.0, 2.0, 0.4),
    (None, None, None, 1.2, 0.2),
    (None, None, None, None, 1.2),
)


@dataclass(frozen=True)
class Scenario:
    case: int
    margin: str
    model: VineModel

    @property
    def d(self) -> int:
        return self.model.d

    def margins(self) -> ParametricMargins:
        m = NormalMargin() if self.margin == "normal" else LogNormalMargin()
        return ParametricMargins((m,) * self.d)


def get_scenario(case: int) -> Scenario:
    """Cases 1 and 2 use the Gaussian vine, 3 and 4 the mixed-family vine;
    odd cases have standard normal margins, even ones standard lognormal."""
    if case not in (1, 2, 3, 4):
        raise InputError(f"unknown scenario case {case}; expected 1-4")
    fam, par = (_F1, _P1) if case in (1, 2) else (_F2, _P2)
    model = VineModel.from_matrices(validate_array(np.array(SCENARIO_ARRAY)), fam, par)
    return Scenario(case, "normal" if case in (1, 3) else "lognormal", model)


def generate_scenario(case, n: int, seed=None) -> np.ndarray:
    """Draw ``n`` rows from scenario ``case`` on the natural scale."""
    sc = case if isinstance(case, Scenario) else get_scenario(int(case))
    u = rosenblatt_simulate(sc.model, n=n, seed=seed)
    return sc.margins().ppf(u)
