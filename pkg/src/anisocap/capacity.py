"""Fractional capacity of grid condensers by minimum cut and by linear programming.

For a condenser ``L`` inside a domain ``D`` (admissible functions vanish
outside ``D``) the discrete seminorm of ``f`` is a sum of
``|f_A - f_B| W(A, B)`` terms, so by the co-area structure some minimizer
is an indicator and the capacity equals ``2 min { P(S) : L <= S <= D }``.
That minimum is a cut in the graph whose nodes are the free cells
``D \\ L`` plus a source (``L``) and a sink (everything outside ``D``):

* free-free arcs carry ``W(A, B)``;
* source arcs carry ``src(A) = sum_{B in L} W(A, B)``;
* sink arcs carry ``out(A) = C - sum_{B in D, B != A} W(A, B)``, the weight
  ``A`` sends outside the domain (``C`` is the self mass);
* the constant ``sum_{A in L} out(A)`` completes ``P(S)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .geometry import ConvexBody, MomentBody, Polygon, anisotropic_perimeter
from .grid import Grid, GridSet, scale_set, set_dilate
from .kernel import KernelModel, grid_codes
from .perimeter import perimeter_of_cells

MODES = ("fractional", "first_order")
MAX_FREE_NODES = 9000
ORACLE_MAX_CELLS = 256


class CapacityError(ValueError):
    pass


class CapacityProblem:
    """Condenser ``L`` on its grid, admissible support ``domain``.

    Parameters
    ----------
    condenser : GridSet
    model : KernelModel
    domain : GridSet or array_like of bool, optional
        Cells where admissible functions may be nonzero.  Defaults to the
        grid minus ``pad`` outer layers.
    mode : {"fractional", "first_order"}
    pad : int
    """

    def __init__(self, condenser: GridSet, model: KernelModel, domain=None, mode: str = "fractional", pad: int = 1):
        if mode not in MODES:
            raise CapacityError(f"mode must be one of {MODES}")
        if condenser.grid.dim != model.dim:
            raise CapacityError("condenser and body dimensions differ")
        grid = condenser.grid
        if domain is None:
            dmask = grid.interior(pad)
        else:
            dmask = np.asarray(domain.mask if isinstance(domain, GridSet) else domain, dtype=bool)
            if dmask.shape != grid.extent:
                raise CapacityError("domain mask does not match the grid")
            dmask = dmask & grid.interior(pad)
        if np.any(condenser.mask & ~dmask):
            raise CapacityError("condenser touches the padding zone")
        self.condenser = condenser
        self.model = model
        self.domain = dmask
        self.mode = mode
        self.pad = pad

    @property
    def grid(self) -> Grid:
        return self.condenser.grid

    def with_condenser(self, L: GridSet) -> "CapacityProblem":
        return CapacityProblem(L, self.model, self.domain, self.mode, self.pad)


@dataclass
class CutGraph:
    free_cells: np.ndarray
    pair_i: np.ndarray
    pair_j: np.ndarray
    pair_w: np.ndarray
    src: np.ndarray
    out: np.ndarray
    const: float

    @property
    def n_free(self):
        return len(self.free_cells)


def build_cut_graph(p: CapacityProblem) -> CutGraph:
    h = p.grid.spacing
    model = p.model
    L = p.condenser.mask
    dom_cells = np.argwhere(p.domain)
    lo = dom_cells.min(axis=0)
    he = dom_cells.max(axis=0) - lo + 1
    table = model.table(he, h).ravel()
    C = model.self_mass(h)
    free = np.argwhere(p.domain & ~L)
    lcells = np.argwhere(L)
    if len(free) > MAX_FREE_NODES:
        raise CapacityError(f"{len(free)} free cells exceed the dense-graph limit {MAX_FREE_NODES}; "
                            "restrict the domain")
    dc, center = grid_codes(dom_cells - lo, he)
    fc = grid_codes(free - lo, he)[0]
    lc = grid_codes(lcells - lo, he)[0]
    out_f = C - _backend.cross_sum(dc, fc, table, center)
    out_l = C - _backend.cross_sum(dc, lc, table, center) if len(lc) else np.zeros(0)
    src = _backend.cross_sum(lc, fc, table, center) if len(lc) else np.zeros(len(fc))
    # quadrature rounding may push an outflow a hair below zero
    out_f = np.maximum(out_f, 0.0)
    out_l = np.maximum(out_l, 0.0)
    iu, ju = np.triu_indices(len(fc), k=1)
    w = table[fc[ju] - fc[iu] + center] if len(fc) > 1 else np.zeros(0)
    keep = w > 0
    return CutGraph(free, iu[keep], ju[keep], w[keep], src, out_f, float(out_l.sum()))


def _csr_arcs(g: CutGraph):
    n = g.n_free
    s, t = n, n + 1
    idx = np.arange(n)
    u = np.concatenate([g.pair_i, np.full(n, s), idx])
    v = np.concatenate([g.pair_j, idx, np.full(n, t)])
    c_uv = np.concatenate([g.pair_w, g.src, g.out])
    c_vu = np.concatenate([g.pair_w, np.zeros(n), np.zeros(n)])
    tails = np.empty(2 * len(u), dtype=np.int64)
    heads = np.empty_like(tails)
    caps = np.empty(2 * len(u))
    tails[0::2], tails[1::2] = u, v
    heads[0::2], heads[1::2] = v, u
    caps[0::2], caps[1::2] = c_uv, c_vu
    rev = np.arange(len(tails)) ^ 1
    order = np.argsort(tails, kind="stable")
    pos = np.empty_like(order)
    pos[order] = np.arange(len(order))
    indptr = np.concatenate([[0], np.cumsum(np.bincount(tails, minlength=n + 2))]).astype(np.int64)
    return indptr, heads[order], np.ascontiguousarray(caps[order]), pos[rev[order]].astype(np.int64), s, t


@dataclass
class CapacityResult:
    value: float
    optimal_set: GridSet
    truncation_bound: float
    cut_value: float
    backend: str
    details: dict = field(default_factory=dict)

    def to_dict(self):
        from .grid import rle_encode

        return {"value": self.value, "truncation_bound": self.truncation_bound, "cut_value": self.cut_value,
                "backend": self.backend, "optimal_cells": self.optimal_set.count,
                "optimal_set_rle": rle_encode(self.optimal_set.mask)}


def capacity_mincut(p: CapacityProblem, backend=None) -> CapacityResult:
    """``cap(L) = 2 min { P(S) : L <= S <= domain }`` by max-flow/min-cut.

    ``backend`` optionally names ``"python"`` or ``"compiled"`` for the
    flow solver; the reported value is recomputed from the cut set.
    """
    L = p.condenser
    h = p.grid.spacing
    if L.empty:
        return CapacityResult(0.0, L, 0.0, 0.0, _backend.NAME)
    impl = _backend.impl if backend is None else _backend.implementations()[backend]
    g = build_cut_graph(p)
    if g.n_free == 0:
        sel = L.mask.copy()
        flow = 0.0
    else:
        indptr, heads, caps, rev, s, t = _csr_arcs(g)
        tol = 1e-13 * float(caps.max()) if len(caps) else 0.0
        flow, side = impl.maxflow(indptr, heads, caps, rev, s, t, tol)
        sel = L.mask.copy()
        fc = g.free_cells[side[: g.n_free]]
        sel[tuple(fc.T)] = True
    opt = GridSet(p.grid, sel, f"O*({L.label})")
    per, bound = perimeter_of_cells(opt.cells(), p.model, h)
    return CapacityResult(2.0 * per, opt, 2.0 * bound, 2.0 * (flow + g.const), impl.BACKEND_NAME)


def capacity_oracle(p: CapacityProblem, upper_bound: bool = True, return_solution: bool = False):
    """Direct minimization of the discrete seminorm over ``f >= 1_L`` as an LP.

    Variables are ``f`` on free cells, ``t >= |f_A - f_B|`` per free pair
    and ``u >= |1 - f_A|``; with ``upper_bound=False`` the box ``f <= 1``
    is dropped.
    """
    from scipy.optimize import linprog
    from scipy.sparse import coo_matrix

    cells = int(np.prod(p.grid.extent))
    if cells > ORACLE_MAX_CELLS:
        raise CapacityError(f"the LP oracle handles grids of at most {ORACLE_MAX_CELLS} cells, got {cells}")
    if p.condenser.empty:
        return (0.0, np.zeros(p.grid.extent)) if return_solution else 0.0
    g = build_cut_graph(p)
    nf, npairs = g.n_free, len(g.pair_w)
    if nf == 0:
        val = 2.0 * g.const
        return (val, p.condenser.mask.astype(float)) if return_solution else val
    nv = nf + npairs + nf
    cost = np.concatenate([g.out, g.pair_w, g.src])
    k = np.arange(npairs)
    # f_i - f_j - t <= 0 and f_j - f_i - t <= 0
    rows = np.concatenate([k, k, k, npairs + k, npairs + k, npairs + k])
    cols = np.concatenate([g.pair_i, g.pair_j, nf + k, g.pair_i, g.pair_j, nf + k])
    vals = np.concatenate([np.ones(npairs), -np.ones(npairs), -np.ones(npairs),
                           -np.ones(npairs), np.ones(npairs), -np.ones(npairs)])
    # 1 - f - u <= 0 and f - 1 - u <= 0
    i = np.arange(nf)
    base = 2 * npairs
    rows = np.concatenate([rows, base + i, base + i, base + nf + i, base + nf + i])
    cols = np.concatenate([cols, i, nf + npairs + i, i, nf + npairs + i])
    vals = np.concatenate([vals, -np.ones(nf), -np.ones(nf), np.ones(nf), -np.ones(nf)])
    b = np.concatenate([np.zeros(2 * npairs), -np.ones(nf), np.ones(nf)])
    A = coo_matrix((vals, (rows, cols)), shape=(2 * npairs + 2 * nf, nv)).tocsr()
    bounds = [(0.0, 1.0 if upper_bound else None)] * nf + [(0.0, None)] * (npairs + nf)
    res = linprog(cost, A_ub=A, b_ub=b, bounds=bounds, method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise CapacityError(f"linear program failed: {res.message}")
    value = 2.0 * (res.fun + g.const)
    if not return_solution:
        return value
    f = p.condenser.mask.astype(float)
    f[tuple(g.free_cells.T)] = res.x[:nf]
    return value, f


# ----------------------------------------------------------------------
# property checks

@dataclass
class CheckResult:
    name: str
    margin: float
    values: dict
    passed: bool

    def to_dict(self):
        return {"name": self.name, "margin": self.margin, "values": self.values, "passed": self.passed}


def capacity(L: GridSet, model: KernelModel, domain=None, pad: int = 1) -> float:
    return capacity_mincut(CapacityProblem(L, model, domain, pad=pad)).value


def capacity_homogeneity_check(L: GridSet, model: KernelModel, s: int = 2, r: float = 2.0, pad: int = 1):
    """Residuals of ``cap(sL) = s^{n-a} cap(L)`` and ``cap(L; rK) = r^{n+a} cap(L; K)``."""
    if int(s) != s or s < 1:
        raise CapacityError("set scaling must be an integer refinement factor")
    n, a = model.dim, model.alpha
    base = capacity(L, model, pad=pad)
    # ||x||_{rK} = ||x||_K / r, so radius R / r keeps the same pairs
    scaled_body = model.replace(body=model.body.scaled(r),
                                trunc_radius=None if model.trunc_radius is None else model.trunc_radius / r)
    cap_r = capacity(L, scaled_body, pad=pad)
    sL = scale_set(L, int(s))
    m_s = model if model.trunc_radius is None else model.replace(trunc_radius=model.trunc_radius * s)
    cap_s = capacity(sL, m_s, pad=pad)
    res1 = abs(cap_s - s ** (n - a) * base) / base
    res2 = abs(cap_r - r ** (n + a) * base) / base
    return {"cap": base, "cap_sL": cap_s, "cap_rK": cap_r, "residual_set": res1, "residual_body": res2}


def monotonicity_check(L1: GridSet, L2: GridSet, model: KernelModel, domain=None) -> CheckResult:
    if not L1.issubset(L2):
        raise CapacityError("monotonicity needs L1 inside L2")
    c1, c2 = capacity(L1, model, domain), capacity(L2, model, domain)
    return CheckResult("monotonicity", c2 - c1, {"cap_L1": c1, "cap_L2": c2}, c2 - c1 >= 0)


def subadditivity_check(L1: GridSet, L2: GridSet, model: KernelModel, domain=None) -> CheckResult:
    c1, c2 = capacity(L1, model, domain), capacity(L2, model, domain)
    c12 = capacity(L1.union(L2), model, domain)
    m = c1 + c2 - c12
    return CheckResult("subadditivity", m, {"cap_L1": c1, "cap_L2": c2, "cap_union": c12}, m >= 0)


def usc_check(L: GridSet, model: KernelModel, radii=None, tol: float = 0.02, domain=None) -> CheckResult:
    """Capacities of ``L_j = dilate(L, r_j)`` for decreasing ``r_j`` and of ``L`` itself."""
    h = L.grid.spacing
    radii = [4 * h, 2 * h, h] if radii is None else list(radii)
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise CapacityError("dilation radii must decrease")
    seq = [capacity(set_dilate(L, r), model, domain) for r in radii]
    base = capacity(L, model, domain)
    monotone = all(b <= a for a, b in zip(seq, seq[1:])) and seq[-1] >= base
    gap = (seq[-1] - base) / base
    return CheckResult("usc", -gap, {"radii": radii, "caps": seq, "cap_L": base, "gap": gap,
                                      "monotone": monotone}, monotone and gap < tol)


@dataclass
class IsoCapResult:
    deficit: float
    cap: float
    rhs: float
    gamma_lower: float
    truncation_bound: float = 0.0


def isocapacitary_check(L: GridSet, model: KernelModel, domain=None) -> IsoCapResult:
    """``alpha cap / (2 n V(K)^{(n+a)/n} V(L)^{(n-a)/n}) - 1``; ``+inf`` when ``V(L) = 0``."""
    n, a = model.dim, model.alpha
    gamma_lower = n / a * model.volume_K ** ((n + a) / n)
    if L.volume == 0:
        return IsoCapResult(np.inf, 0.0, 0.0, gamma_lower)
    res = capacity_mincut(CapacityProblem(L, model, domain))
    rhs = 2 * n * model.volume_K ** ((n + a) / n) * L.volume ** ((n - a) / n)
    return IsoCapResult(a * res.value / rhs - 1.0, res.value, rhs, gamma_lower, a * res.truncation_bound / rhs)


@dataclass
class FirstOrderResult:
    value: float
    volume_bound: float
    margin: float
    polar_variant: float
    volume_Z1K: float


def capacity_first_order(L, K: ConvexBody, polygon: Polygon | None = None, moment: MomentBody | None = None):
    """``2 P(L, Z1 K)`` for a convex condenser, with the volume bound
    ``2 n V(Z1 K)^{1/n} V(L)^{(n-1)/n}`` and the polar variant ``2 P(L, Z1* K)``."""
    poly = polygon if polygon is not None else getattr(L, "polygon", None)
    if poly is None and isinstance(L, Polygon):
        poly = L
    if poly is None:
        raise CapacityError("first-order capacity needs the polygon form of the condenser")
    if not poly.is_convex():
        raise CapacityError("first-order capacity implemented for convex condensers only")
    Z = moment if moment is not None else MomentBody(K)
    value = 2.0 * anisotropic_perimeter(poly, Z)
    vz = Z.volume()
    n = K.dim
    rhs = 2 * n * vz ** (1 / n) * poly.area ** ((n - 1) / n)
    polar = 2.0 * anisotropic_perimeter(poly, Z.polar())
    return FirstOrderResult(value, rhs, value - rhs, polar, vz)


def capacity_solve(p: CapacityProblem):
    """Dispatch on ``p.mode``: min-cut for ``fractional``, the closed form for
    ``first_order`` (convex condensers with a polygon form only)."""
    if p.mode == "first_order":
        return capacity_first_order(p.condenser, p.model.body)
    return capacity_mincut(p)


def ring_domain(L: GridSet, width: int) -> np.ndarray:
    """``L`` dilated by ``width`` cells, as a domain mask."""
    return set_dilate(L, width * L.grid.spacing).mask
