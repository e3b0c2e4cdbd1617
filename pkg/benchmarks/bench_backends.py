"""Time the compiled kernels against the NumPy/SciPy fallback.

    python benchmarks/bench_backends.py [--repeat 3] [--json]

Each kernel runs on identical inputs under both backends; the table lists
the best wall time of ``--repeat`` runs, the speed-up, and the largest
relative difference between the two outputs.
"""
import argparse
import json
import time

import numpy as np

from anisocap import _backend
from anisocap.capacity import CapacityProblem, _csr_arcs, build_cut_graph
from anisocap.geometry import stock_body
from anisocap.grid import Grid, ball
from anisocap.kernel import KernelModel, grid_codes


def _best(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def _diff(a, b):
    if isinstance(a, tuple):
        return max(_diff(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    fin = np.isfinite(a) & np.isfinite(b)
    scale = max(np.abs(a[fin]).max(initial=0.0), 1e-300)
    return float(np.abs(a[fin] - b[fin]).max(initial=0.0) / scale)


def cases():
    K = stock_body("hexagon")
    model = KernelModel(K, 0.5)
    table = model.table((64, 64), 1.0)
    grid = Grid.covering(2, 64, 2.0)
    E = ball(grid, stock_body("square"), 1.0)
    codes, center = grid_codes(E.cells(), (64, 64))
    vals = np.random.default_rng(0).random(len(codes))
    mask = np.zeros((160, 160), dtype=bool)
    mask[40:120:7, 30:130:5] = True
    g = build_cut_graph(CapacityProblem(ball(Grid.covering(2, 24, 2.0), K, 0.6), model.replace(alpha=0.5)))
    arcs = _csr_arcs(g)
    tol = 1e-13 * float(arcs[2].max())
    return {
        "weight_table_2d (24x24)": lambda m: m.weight_table_2d(K.normals, K.offsets, K.vertex_angles, 0.5, 24, 24),
        f"cross_sum ({len(codes)} cells)": lambda m: m.cross_sum(codes, codes, table.ravel(), center),
        f"absdiff_sum ({len(codes)} cells)": lambda m: m.absdiff_sum(codes, vals, table.ravel(), center),
        "edt_sq (160x160)": lambda m: m.edt_sq(mask),
        f"maxflow ({g.n_free} nodes)": lambda m: m.maxflow(*arcs, tol)[0],
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)
    impls = _backend.implementations()
    if "compiled" not in impls:
        raise SystemExit("compiled core not built; run `python setup.py build_ext --inplace`")
    rows = []
    for name, fn in cases().items():
        tc, oc = _best(lambda: fn(impls["compiled"]), args.repeat)
        tp, op = _best(lambda: fn(impls["python"]), args.repeat)
        rows.append({"kernel": name, "compiled_s": tc, "python_s": tp, "speedup": tp / tc, "rel_diff": _diff(oc, op)})
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    print(f"{'kernel':<30} {'compiled s':>11} {'python s':>10} {'speed-up':>9} {'rel diff':>9}")
    for r in rows:
        print(f"{r['kernel']:<30} {r['compiled_s']:>11.4f} {r['python_s']:>10.4f} {r['speedup']:>9.1f} "
              f"{r['rel_diff']:>9.1e}")


if __name__ == "__main__":
    main()
