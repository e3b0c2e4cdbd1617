import itertools

import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from anisocap import _backend
from anisocap.capacity import (CapacityError, CapacityProblem, build_cut_graph, capacity, capacity_first_order,
                               capacity_homogeneity_check, capacity_mincut, capacity_oracle, capacity_solve,
                               isocapacitary_check, monotonicity_check, subadditivity_check, _csr_arcs)
from anisocap.geometry import MomentBody, Polygon, stock_body
from anisocap.grid import Grid, GridSet, ball, box, polygon_set, set_dilate
from anisocap.kernel import KernelModel
from anisocap.perimeter import frac_perimeter


@pytest.fixture
def g8():
    return Grid(2, (8, 8), 0.25, (-1.0, -1.0))


def _mask(grid, cells):
    m = np.zeros(grid.extent, bool)
    for c in cells:
        m[c] = True
    return m


def _brute_force(L, window, model):
    """min 2 P(S) over every S with L <= S <= window."""
    free = [tuple(c) for c in np.argwhere(window & ~L.mask)]
    best = np.inf
    for bits in itertools.product((False, True), repeat=len(free)):
        m = L.mask.copy()
        for c, b in zip(free, bits):
            m[c] = b
        best = min(best, 2 * frac_perimeter(GridSet(L.grid, m), model).value)
    return best


@pytest.mark.parametrize("alpha", [0.3, 0.8])
def test_single_cell_brute_force(g8, alpha):
    L = GridSet(g8, _mask(g8, [(4, 4)]))
    window = _mask(g8, [(i, j) for i in range(3, 6) for j in range(3, 6)])
    model = KernelModel(stock_body("square"), alpha)
    got = capacity_mincut(CapacityProblem(L, model, window)).value
    assert got == pytest.approx(_brute_force(L, window, model), rel=1e-12)
    assert got <= 2 * frac_perimeter(L, model).value * (1 + 1e-12)


def test_block_brute_force(g8):
    L = GridSet(g8, _mask(g8, [(3, 3), (3, 4), (4, 3), (4, 4)]))
    window = _mask(g8, [(i, j) for i in range(2, 6) for j in range(2, 6)])
    model = KernelModel(stock_body("hexagon"), 0.5)
    got = capacity_mincut(CapacityProblem(L, model, window)).value
    assert got == pytest.approx(_brute_force(L, window, model), rel=1e-12)


def test_empty_condenser(g8):
    L = GridSet(g8, np.zeros(g8.extent, bool))
    p = CapacityProblem(L, KernelModel(stock_body("square"), 0.5))
    assert capacity_mincut(p).value == 0.0
    assert capacity_oracle(p) == 0.0


def test_mincut_matches_oracle(g8):
    L = GridSet(g8, _mask(g8, [(3, 3), (3, 4), (4, 3), (4, 4)]))
    p = CapacityProblem(L, KernelModel(stock_body("square"), 0.5))
    assert capacity_mincut(p).value == pytest.approx(capacity_oracle(p), rel=1e-6)


def test_box_constraint_inactive(g8):
    L = GridSet(g8, _mask(g8, [(3, 3), (4, 4), (3, 4)]))
    p = CapacityProblem(L, KernelModel(stock_body("diamond"), 0.6))
    boxed = capacity_oracle(p)
    free_val, f = capacity_oracle(p, upper_bound=False, return_solution=True)
    assert free_val == pytest.approx(boxed, rel=1e-8)
    assert f.max() <= 1 + 1e-7


def test_backends_give_same_cut(g8):
    L = GridSet(g8, _mask(g8, [(2, 2), (5, 5)]))
    p = CapacityProblem(L, KernelModel(stock_body("hexagon"), 0.4))
    results = [capacity_mincut(p, backend=name) for name in _backend.implementations()]
    for r in results[1:]:
        assert r.value == pytest.approx(results[0].value, rel=1e-12)
        assert np.array_equal(r.optimal_set.mask, results[0].optimal_set.mask)


def _random_graph(rng, n):
    tails, heads = [], []
    for u in range(n):
        for v in rng.choice(n, size=4, replace=False):
            if u != v:
                tails.append(u)
                heads.append(v)
    return np.array(tails), np.array(heads)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_maxflow_implementations_vs_integer_solver(backend_impl, seed):
    rng = np.random.default_rng(seed)
    n = 30
    t, h = _random_graph(rng, n)
    cap = rng.integers(1, 50, size=len(t))
    # residual pairs for the compiled layout
    u = np.concatenate([t, h])
    v = np.concatenate([h, t])
    c = np.concatenate([cap, np.zeros(len(t))]).astype(float)
    rev = np.concatenate([np.arange(len(t)) + len(t), np.arange(len(t))])
    order = np.argsort(u, kind="stable")
    pos = np.empty_like(order)
    pos[order] = np.arange(len(order))
    indptr = np.concatenate([[0], np.cumsum(np.bincount(u, minlength=n))]).astype(np.int64)
    flow, side = backend_impl.maxflow(indptr, v[order].astype(np.int64), c[order], pos[rev[order]].astype(np.int64),
                                      0, n - 1, 1e-12)
    ref = maximum_flow(csr_matrix((cap.astype(np.int32), (t, h)), shape=(n, n)), 0, n - 1).flow_value
    assert flow == pytest.approx(ref, abs=1e-9)
    assert side[0] and not side[n - 1]
    # the cut capacity equals the flow
    cut = sum(ci for a, b, ci in zip(t, h, cap) if side[a] and not side[b])
    assert cut == pytest.approx(ref, abs=1e-9)


def test_fallback_handles_wide_dynamic_range(g8):
    L = GridSet(g8, _mask(g8, [(4, 4)]))
    p = CapacityProblem(L, KernelModel(stock_body("square"), 0.05))
    g = build_cut_graph(p)
    arcs = _csr_arcs(g)
    impls = _backend.implementations()
    vals = [impl.maxflow(*arcs, 1e-13 * float(arcs[2].max()))[0] for impl in impls.values()]
    assert np.allclose(vals, vals[0], rtol=1e-10)


def test_monotone_subadditive_upper_bound():
    g = Grid.covering(2, 24, 1.5)
    K = stock_body("square")
    m = KernelModel(K, 0.5)
    L1 = box(g, -0.5, 0.0)
    L2 = box(g, -0.5, 0.5)
    assert monotonicity_check(L1, L2, m).margin >= 0
    assert monotonicity_check(L1, L1, m).margin == 0
    a, b = box(g, -1.2, -0.7), box(g, 0.7, 1.2)
    r = subadditivity_check(a, b, m)
    assert r.margin >= 0
    assert r.margin < 0.1 * r.values["cap_union"]
    cap = capacity(L2, m)
    for rad in (0.0, 0.2, 0.4):
        D = set_dilate(L2, rad)
        assert cap <= 2 * frac_perimeter(D, m).value * (1 + 1e-12)
    res = capacity_mincut(CapacityProblem(L2, m))
    assert L2.issubset(res.optimal_set)
    assert res.value == pytest.approx(res.cut_value, rel=1e-9)


def test_homogeneity_residuals():
    g = Grid.covering(2, 16, 1.0)
    L = box(g, -0.25, 0.25)
    out = capacity_homogeneity_check(L, KernelModel(stock_body("hexagon"), 0.5), s=2, r=2.0)
    assert out["residual_body"] < 1e-10
    assert out["residual_set"] < 5e-2
    same = capacity_homogeneity_check(L, KernelModel(stock_body("hexagon"), 0.5), s=1, r=1.0)
    assert same["residual_body"] == 0 and same["residual_set"] == 0


def test_isocapacitary_square_small_alpha():
    g = Grid.covering(2, 40, 2.0)
    K = stock_body("square")
    L = box(g, -1, 1)
    res = isocapacitary_check(L, KernelModel(K, 0.1))
    assert -1e-3 <= res.deficit <= 0.2
    assert res.cap >= 2 * res.gamma_lower * L.volume ** (1.9 / 2)


def _zonoid_volume(K, m=20000):
    # V = 1/2 int (h^2 - h'^2) dtheta for a smooth support function
    Z = MomentBody(K)
    t = 2 * np.pi * np.arange(m) / m
    h = np.array([Z.support(np.array([np.cos(a), np.sin(a)])) for a in t])
    dh = (np.roll(h, -1) - np.roll(h, 1)) / (2 * 2 * np.pi / m)
    return 0.5 * np.sum(h**2 - dh**2) * 2 * np.pi / m


def test_first_order_square():
    K = stock_body("square")
    res = capacity_first_order(Polygon.from_body(K), K)
    assert res.value == pytest.approx(48.0, rel=1e-12)
    vz = _zonoid_volume(K, 4000)
    assert res.volume_Z1K == pytest.approx(vz, rel=1e-4)
    assert res.value >= 2 * 2 * np.sqrt(vz) * np.sqrt(4.0)


def test_first_order_errors():
    g = Grid.covering(2, 32, 2.0)
    K = stock_body("square")
    L_shape = Polygon([[-1, -1], [1, -1], [1, 0], [0, 0], [0, 1], [-1, 1]])
    with pytest.raises(CapacityError, match="convex condensers only"):
        capacity_first_order(polygon_set(g, L_shape), K)
    with pytest.raises(CapacityError, match="polygon"):
        capacity_first_order(GridSet(g, box(g, -1, 1).mask), K)


def test_solve_dispatches_on_mode():
    g = Grid.covering(2, 16, 2.0)
    K = stock_body("square")
    L = ball(g, K, 0.5)
    m = KernelModel(K, 0.5)
    assert capacity_solve(CapacityProblem(L, m, mode="first_order")).value == pytest.approx(2 * 0.5 * 24)
    assert capacity_solve(CapacityProblem(L, m)).value == capacity_mincut(CapacityProblem(L, m)).value


def test_problem_validation(g8):
    m = KernelModel(stock_body("square"), 0.5)
    edge = GridSet(g8, _mask(g8, [(1, 3)]))
    with pytest.raises(CapacityError, match="padding"):
        CapacityProblem(edge, m, pad=2)
    with pytest.raises(CapacityError, match="mode"):
        CapacityProblem(GridSet(g8, _mask(g8, [(3, 3)])), m, mode="exact")
    big = Grid.covering(2, 32, 2.0)
    with pytest.raises(CapacityError, match="at most 256 cells"):
        capacity_oracle(CapacityProblem(box(big, -0.5, 0.5), m))
