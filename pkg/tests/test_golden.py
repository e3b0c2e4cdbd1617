"""Frozen reference values; regenerate with ANISOCAP_REGEN_GOLDEN=1 after a deliberate change."""
import json
import os
from pathlib import Path

import numpy as np
import pytest

from anisocap.capacity import CapacityProblem, capacity_mincut
from anisocap.geometry import stock_body
from anisocap.grid import Grid, ball, box, tent
from anisocap.kernel import KernelModel
from anisocap.perimeter import frac_perimeter, seminorm

GOLDEN = Path(__file__).parent / "golden" / "values.json"
REGEN = os.environ.get("ANISOCAP_REGEN_GOLDEN") == "1"


def compute():
    out = {}
    g = Grid.covering(2, 32, 2.0)
    for body in ("square", "hexagon", "disk256"):
        K = stock_body(body)
        for a in (0.25, 0.5, 0.75):
            m = KernelModel(K, a)
            out[f"unit_weight[{body},{a}](1,0)"] = m.unit_weight((1, 0))
            out[f"unit_weight[{body},{a}](2,1)"] = m.unit_weight((2, 1))
            out[f"self_mass[{body},{a}]"] = m.unit_self_mass()
            out[f"perimeter[square_set,{body},{a}]"] = frac_perimeter(box(g, -1, 1), m).value
            out[f"perimeter[diamond_set,{body},{a}]"] = frac_perimeter(ball(g, stock_body("diamond"), 1.0), m).value
            out[f"seminorm[tent4,{body},{a}]"] = seminorm(tent(g, 1.5, levels=4), m)
    gc = Grid.covering(2, 20, 2.0)
    for body in ("square", "hexagon"):
        m = KernelModel(stock_body(body), 0.5)
        out[f"capacity[square_0.6,{body}]"] = capacity_mincut(CapacityProblem(box(gc, -0.6, 0.6), m)).value
    out["perimeter[square_set,square,0.5,trunc1.25]"] = frac_perimeter(
        box(g, -1, 1), KernelModel(stock_body("square"), 0.5, trunc_radius=1.25)).value
    return out


def test_golden_values():
    got = compute()
    if REGEN:
        GOLDEN.write_text(json.dumps(got, indent=1, sort_keys=True) + "\n")
        pytest.skip("golden values regenerated")
    want = json.loads(GOLDEN.read_text())
    assert set(got) == set(want)
    bad = {k: (got[k], want[k]) for k in want if not np.isclose(got[k], want[k], rtol=1e-11, atol=0)}
    assert not bad
