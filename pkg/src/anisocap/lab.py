"""Verification suites: every inequality, identity and limit as a numeric check.

Each suite returns a :class:`SuiteReport` whose instances carry a left and
right side, a margin and the tolerance the margin is held to; an instance
passes iff ``margin >= -tolerance``.  Margins are relative unless a suite
says otherwise, and tolerances include any reported truncation bound.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .capacity import (CapacityProblem, capacity_first_order, capacity_homogeneity_check,
                       capacity_mincut, capacity_oracle, ring_domain, set_dilate)
from .geometry import (PLANAR_STOCK, MomentBody, Polygon, anisotropic_perimeter, polar_body,
                       stock_body, tau_n)
from .grid import (Grid, GridFunction, GridMeasure, GridSet, ball, box, indicator,
                   mollified_indicator, tent, union)
from .kernel import KernelModel, layer_cake_tail
from .perimeter import (coarea_check, cyclic_inequality_check, frac_perimeter, isoperimetric_check,
                        limit_alpha0, limit_alpha1, linear_extrapolate, seminorm)

ALPHAS = (0.1, 0.3, 0.5, 0.7, 0.9)
ALPHA_SWEEP = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
SET_NAMES = ("square", "diamond", "hexagon", "kball", "two_squares")
ROUNDING = 1e-9


class LabError(ValueError):
    pass


# ----------------------------------------------------------------------
# reports

@dataclass
class Instance:
    case: str
    lhs: float
    rhs: float
    margin: float
    tolerance: float
    bound: float = 0.0
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.margin >= -self.tolerance)

    def to_dict(self):
        return {"case": self.case, "lhs": float(self.lhs), "rhs": float(self.rhs),
                "margin": float(self.margin), "tolerance": float(self.tolerance),
                "bound": float(self.bound), "passed": self.passed, "params": self.params}


@dataclass
class SuiteReport:
    name: str
    instances: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    wall_time: float = 0.0
    notes: list = field(default_factory=list)
    tol_override: float | None = None

    @property
    def passed(self) -> bool:
        return all(i.passed for i in self.instances)

    @property
    def failures(self):
        return [i for i in self.instances if not i.passed]

    def tol(self, key: str, default: float) -> float:
        """Tolerance ``key``, recorded in the report (the override wins)."""
        value = default if self.tol_override is None else self.tol_override
        self.tolerances[key] = value
        return value

    def add(self, case, lhs, rhs, margin, tol, bound=0.0, **params) -> Instance:
        total = tol if self.tol_override is not None else tol + bound
        inst = Instance(case, float(lhs), float(rhs), float(margin), float(total), float(bound), params)
        self.instances.append(inst)
        return inst

    def to_dict(self, timing: bool = False):
        d = {"name": self.name, "passed": self.passed, "n_instances": len(self.instances),
             "n_failed": len(self.failures), "instances": [i.to_dict() for i in self.instances],
             "tolerances": dict(self.tolerances), "seeds": dict(self.seeds), "notes": list(self.notes)}
        if timing:
            d["wall_time"] = self.wall_time
        return d


def _rel(lhs, rhs):
    """Relative margin of ``lhs <= rhs``."""
    scale = max(abs(rhs), abs(lhs), 1e-300)
    return (rhs - lhs) / scale


def _rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


class _Timer:
    def __init__(self, report):
        self.report = report

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.wall_time = time.perf_counter() - self.t0
        return False


def _suite(name, tol_override=None, **seeds):
    return _Timer(SuiteReport(name, seeds=seeds, tol_override=tol_override))


# ----------------------------------------------------------------------
# instance families

def perimeter_grid(extent: int = 128) -> Grid:
    return Grid.covering(2, extent, 2.0)


def capacity_grid(extent: int = 40) -> Grid:
    return Grid.covering(2, extent, 2.0)


def stock_sets(grid: Grid, K, scale: float = 1.0) -> dict:
    """The five stock sets; ``kball`` is the ball of ``K`` itself."""
    s = scale
    return {
        "square": box(grid, -s, s, label="square"),
        "diamond": ball(grid, stock_body("diamond"), s, label="diamond"),
        "hexagon": ball(grid, stock_body("hexagon"), s, label="hexagon"),
        "kball": ball(grid, K, s, label=f"ball_{K.label}"),
        "two_squares": union(box(grid, [-1.6 * s, -0.6 * s], [-0.4 * s, 0.6 * s]),
                             box(grid, [0.4 * s, -0.6 * s], [1.6 * s, 0.6 * s]), label="two_squares"),
    }


def stock_functions(grid: Grid, K) -> dict:
    """Indicators, a scaled indicator, a two-level step, tents and an ``f_eps``."""
    sq = box(grid, -1, 1, label="square")
    small = box(grid, -0.5, 0.5, label="small_square")
    h = grid.spacing
    two = GridFunction(grid, indicator(sq).values + indicator(small).values, "two_level")
    return {
        "indicator": indicator(sq),
        "scaled_indicator": indicator(ball(grid, stock_body("diamond"), 1.0, label="diamond"), 2.5),
        "two_level": two,
        "tent": tent(grid, 1.2, levels=6, label="tent6"),
        "tent_K": tent(grid, 1.2, body=K, levels=4, label=f"tent4_{K.label}"),
        "f_eps": mollified_indicator(box(grid, -0.7, 0.7, label="box"), 2.5 * h),
    }


def stock_measures(grid: Grid) -> dict:
    """Lebesgue measure and a density bounded by ``M = 2``."""
    x = grid.centers()
    bump = np.where(np.linalg.norm(x - np.array([0.3, 0.2]), axis=-1) <= 0.8, 2.0, 1.0)
    return {"lebesgue": GridMeasure.lebesgue(grid), "bump2": GridMeasure(grid, bump, "bump2")}


def bodies(names=None):
    return [stock_body(b) for b in (names or PLANAR_STOCK)]


class CapCache:
    """Memoized ``capacity_mincut`` keyed by condenser mask and kernel."""

    def __init__(self):
        self._store = {}
        self.hits = 0

    def __call__(self, L: GridSet, model: KernelModel, domain=None):
        dom = None if domain is None else np.asarray(domain, bool).tobytes()
        key = (L.grid.extent, L.grid.spacing, L.grid.origin, L.mask.tobytes(), dom,
               model.body.key, model.alpha, model.trunc_radius)
        if key in self._store:
            self.hits += 1
        else:
            self._store[key] = capacity_mincut(CapacityProblem(L, model, domain))
        return self._store[key]


# ----------------------------------------------------------------------
# Lebesgue-space norm with respect to a measure

@dataclass
class MuNorm:
    direct: float
    layer_cake: float

    @property
    def value(self):
        return self.layer_cake

    @property
    def rel_diff(self):
        return _rel_err(self.direct, self.layer_cake) if self.layer_cake else abs(self.direct)


def _check_beta(beta, n):
    if not 0 < beta <= n:
        raise LabError(f"beta must lie in (0, {n}]")


def lebesgue_mu_norm(f: GridFunction, mu: GridMeasure, beta: float) -> MuNorm:
    """``(int |f|^{n/beta} dmu)^{beta/n}`` directly and by the layer-cake sum
    ``(sum_k mu({|f| >= t_k}) (t_k^p - t_{k-1}^p))^{1/p}``, ``p = n/beta``."""
    n = f.grid.dim
    _check_beta(beta, n)
    if mu.grid != f.grid:
        raise LabError("function and measure live on different grids")
    p = n / beta
    a = np.abs(f.values)
    cv = f.grid.cell_volume
    direct = (cv * float(np.sum(a**p * mu.density))) ** (1 / p)
    levels = f.levels()
    if len(levels) == 0:
        return MuNorm(0.0, 0.0)
    masses = np.array([cv * float(mu.density[a >= t].sum()) for t in levels])
    inc = np.diff(np.concatenate([[0.0], levels]) ** p)
    return MuNorm(direct, float(np.dot(masses, inc)) ** (1 / p))


def level_capacity_integral(levels, caps, beta: float, n: int) -> float:
    """``(int_0^inf cap(O_t)^{n/beta} dt^{n/beta})^{beta/n}`` for step level data."""
    p = n / beta
    inc = np.diff(np.concatenate([[0.0], np.asarray(levels, float)]) ** p)
    return float(np.dot(np.asarray(caps, float) ** p, inc)) ** (1 / p)


def _level_sets(f: GridFunction):
    a = np.abs(f.values)
    return [(float(t), GridSet(f.grid, a >= t, f"{{|{f.label}|>={t:.6g}}}")) for t in f.levels()]


def isoperimetric_kappa(model: KernelModel, M: float = 1.0) -> float:
    """``M^{(n-a)/n} alpha / (2 n V(K)^{(n+a)/n})``."""
    n, a = model.dim, model.alpha
    return M ** ((n - a) / n) * a / (2 * n * model.volume_K ** ((n + a) / n))


# ----------------------------------------------------------------------
# geometry and kernel

def geometry_suite(seed: int = 0, n_points: int = 200, tol_override=None) -> SuiteReport:
    rng = np.random.default_rng(seed)
    with _suite("geometry", tol_override, points=seed) as rep:
        tol = rep.tol("duality", 1e-10)
        for K in bodies():
            x = rng.normal(size=(n_points, 2)) * rng.uniform(0.1, 10.0, size=(n_points, 1))
            err = float(np.max(np.abs(K.gauge(x) - polar_body(K).support(x))))
            rep.add(f"gauge_polar_duality[{K.label}]", err, 0.0, -err, tol, body=K.label)
            back = polar_body(polar_body(K)).vertices
            d = max(float(np.min(np.linalg.norm(back - v, axis=1))) for v in K.vertices)
            rep.add(f"polar_involution[{K.label}]", d, 0.0, -d, rep.tol("involution", 1e-12), body=K.label)
            y, z = x[: n_points // 2], x[n_points // 2:]
            tri = float(np.max(K.gauge(y + z) - K.gauge(y) - K.gauge(z)))
            rep.add(f"gauge_triangle[{K.label}]", tri, 0.0, -tri, rep.tol("norm", 1e-12), body=K.label)
            Z = MomentBody(K)
            u = rng.normal(size=(20, 2))
            v = rng.normal(size=(20, 2))
            hu, hv, huv = Z.support(u), Z.support(v), Z.support(u + v)
            sub = float(np.max(huv - hu - hv))
            rep.add(f"moment_subadditive[{K.label}]", sub, 0.0, -sub / float(hu.max()),
                    rep.tol("moment", 1e-12), body=K.label)
            sym = float(np.max(np.abs(Z.support(-u) - hu)))
            rep.add(f"moment_even[{K.label}]", sym, 0.0, -sym / float(hu.max()), rep.tol("moment", 1e-12),
                    body=K.label)
            hom = float(np.max(np.abs(Z.support(3.5 * u) - 3.5 * hu)))
            rep.add(f"moment_homogeneous[{K.label}]", hom, 0.0, -hom / float(hu.max()),
                    rep.tol("moment", 1e-12), body=K.label)
    return rep


def tail_brute_force(model: KernelModel, r: float, h: float):
    """Weight one cell sends beyond ``||.||_K = r``: cell sum out to the
    largest ``K``-ball inside the tabulated box, analytic tail beyond it."""
    K = model.body
    half = int(np.ceil(3.0 * r * float(K.support(np.eye(2)).max()) / h)) + 2
    table = model.unit_table((half, half)) * h ** (model.dim - model.alpha)
    g = model.offset_gauge(table.shape) * h
    # largest K-ball inside the box |x_i| <= (half - 1) h
    r_in = (half - 1) * h / float(np.max(K.support(np.eye(2))))
    sel = (g > r) & (g <= r_in)
    return float(table[sel].sum()) / h**model.dim + model.tail_integral(r_in), r_in


def kernel_tail_suite(seed: int = 0, n_configs: int = 10, cells_per_radius: int = 24,
                      tol_override=None) -> SuiteReport:
    rng = np.random.default_rng(seed)
    with _suite("kernel_tail", tol_override, configs=seed) as rep:
        tol = rep.tol("brute_force", 0.02)
        tol_lc = rep.tol("layer_cake", 1e-8)
        for k in range(n_configs):
            K = stock_body(PLANAR_STOCK[int(rng.integers(len(PLANAR_STOCK)))])
            a = float(rng.uniform(0.1, 0.9))
            r = float(rng.uniform(0.5, 1.5))
            model = KernelModel(K, a)
            exact = model.tail_integral(r)
            brute, r_in = tail_brute_force(model, r, r / cells_per_radius)
            rep.add(f"tail[{k}:{K.label},a={a:.3f},r={r:.3f}]", brute, exact, -_rel_err(brute, exact), tol,
                    body=K.label, alpha=a, r=r, r_inner=r_in)
            lc = layer_cake_tail(model, r)
            rep.add(f"layer_cake[{k}]", lc, exact, -_rel_err(lc, exact), tol_lc, body=K.label, alpha=a, r=r)
    return rep


# ----------------------------------------------------------------------
# perimeter suites

def thm3_suite(alphas=ALPHA_SWEEP, extent: int = 128, body_names=None, tol_override=None) -> SuiteReport:
    """Isoperimetric deficits over sets x bodies x alpha, plus the small-alpha behaviour."""
    grid = perimeter_grid(extent)
    alphas = sorted(alphas)
    with _suite("thm3", tol_override) as rep:
        tol = rep.tol("deficit", 1e-3)
        for K in bodies(body_names):
            sets = stock_sets(grid, K)
            for a in alphas:
                model = KernelModel(K, a)
                for name, E in sets.items():
                    r = isoperimetric_check(E, model)
                    rep.add(f"deficit[{name},{K.label},a={a:g}]", r.rhs, r.lhs, r.deficit, tol,
                            r.truncation_bound, set=name, body=K.label, alpha=a)
            # E = K: small deficit at the smallest alpha, decreasing as alpha -> 0
            dK = [isoperimetric_check(sets["kball"], KernelModel(K, a)).deficit for a in alphas]
            rep.add(f"near_optimal[{K.label},a={alphas[0]:g}]", dK[0], 0.2, 0.2 - dK[0], rep.tol("optimal", 0.0),
                    body=K.label)
            step = float(np.min(np.diff(dK))) if len(dK) > 1 else 0.0
            rep.add(f"deficit_monotone[{K.label}]", 0.0, step, step, rep.tol("monotone", 0.0), body=K.label,
                    deficits=[float(d) for d in dK])
    return rep


def prop2_suite(extent: int = 64, tol_override=None) -> SuiteReport:
    """Cyclic inequality; half of the instances use a truncation radius."""
    grid = perimeter_grid(extent)
    K = stock_body("square")
    sets = stock_sets(grid, K)
    triples = [(0.2, 0.5, 0.8), (0.3, 0.4, 0.6)]
    with _suite("prop2", tol_override) as rep:
        tol = rep.tol("rounding", 0.0)
        for i, (name, E) in enumerate(sets.items()):
            for j, tr in enumerate(triples):
                R = 1.5 if (i + j) % 2 else None
                res = cyclic_inequality_check(E, K, tr, trunc_radius=R)
                rep.add(f"cyclic[{name},{tr}]", res.lhs, res.rhs, res.margin, tol, res.bound,
                        set=name, alphas=list(tr), trunc_radius=R)
    return rep


def limits_suite(extent: int = 128, fine_extent: int = 256, fn_extent: int = 64, body_names=None,
                 tol_override=None) -> SuiteReport:
    """Both alpha limits of the perimeter of sets and of the seminorm of a step function."""
    with _suite("limits", tol_override) as rep:
        tol0 = rep.tol("alpha_to_0", 0.15)
        tol1 = rep.tol("alpha_to_1", 0.10)
        grid = perimeter_grid(extent)
        a0 = [0.1, 0.05, 0.025]
        a1 = [0.8, 0.9, 0.95]
        Ks = bodies(body_names)
        for K in Ks:
            for name in ("square", "diamond"):
                E = stock_sets(grid, K)[name]
                res = limit_alpha0(E, K, a0)
                rep.add(f"alpha0[{name},{K.label}]", res.extrapolated, res.target, -res.rel_error, tol0,
                        set=name, body=K.label, values=res.values)
        fine = perimeter_grid(fine_extent)
        E = box(fine, -1, 1, label="square")
        for K in Ks:
            res = limit_alpha1(E, K, a1)
            rep.add(f"alpha1[square,{K.label}]", res.extrapolated, res.target, -res.rel_error, tol1,
                    body=K.label, values=res.values)
        # tau_n form of the Euclidean target: (1/2) tau_2 P(E) against P(E, Z1 B)
        disk = stock_body("disk256")
        poly = E.polygon
        eucl = 0.5 * tau_n(2) * float(np.sum(poly.edges()[0]))
        z = anisotropic_perimeter(poly, MomentBody(disk))
        rep.add("tau_form[square,disk256]", z, eucl, -_rel_err(z, eucl), rep.tol("tau_form", 1e-3))
        # seminorm limits on a step tent: levels are pixel squares, so both targets are exact
        g = perimeter_grid(fn_extent)
        f = tent(g, 1.2, levels=6)
        l1 = g.cell_volume * float(np.abs(f.values).sum())
        rects = _level_rectangles(f)
        for K in Ks:
            vals0 = [a * seminorm(f, KernelModel(K, a)) for a in a0]
            ext0 = linear_extrapolate(a0, vals0, 0.0)
            tgt0 = 2 * 2 * KernelModel(K, 0.5).volume_K * l1
            rep.add(f"fn_alpha0[tent6,{K.label}]", ext0, tgt0, -_rel_err(ext0, tgt0), tol0, body=K.label)
            vals1 = [(1 - a) * seminorm(f, KernelModel(K, a)) for a in a1]
            ext1 = linear_extrapolate(a1, vals1, 1.0)
            tgt1 = gradient_functional(rects, MomentBody(K))
            rep.add(f"fn_alpha1[tent6,{K.label}]", ext1, tgt1, -_rel_err(ext1, tgt1), tol1, body=K.label)
            rep.notes.append(f"fn_alpha1 {K.label}: extrapolant / int h_Z1K(grad f) = {2 * ext1 / tgt1:.6g}")
    return rep


def gradient_functional(steps, Z) -> float:
    """``lim (1 - alpha) ||f||`` for a step function given as ``(dt, polygon)``
    level data: ``2 sum dt P(O_t, Z1 K)``, twice the co-area integral of
    ``h_{Z1 K}(grad f)``, matching ``lim (1 - alpha) P_alpha = P(., Z1 K)``."""
    return 2.0 * sum(dt * anisotropic_perimeter(P, Z) for dt, P in steps)


def _level_rectangles(f: GridFunction):
    """``(t_k - t_{k-1}, rectangle)`` for a step function whose level sets are
    full rectangles of cells; the total variation along ``Z1 K`` is then the
    sum of their anisotropic perimeters weighted by the level steps."""
    out = []
    prev = 0.0
    g = f.grid
    for t, E in _level_sets(f):
        idx = np.argwhere(E.mask)
        lo, hi = idx.min(axis=0), idx.max(axis=0)
        if idx.shape[0] != int(np.prod(hi - lo + 1)):
            raise LabError("level set is not a rectangle of cells")
        x0 = np.asarray(g.origin) + lo * g.spacing
        x1 = np.asarray(g.origin) + (hi + 1) * g.spacing
        out.append((t - prev, Polygon([[x0[0], x0[1]], [x1[0], x0[1]], [x1[0], x1[1]], [x0[0], x1[1]]])))
        prev = t
    return out


def coarea_suite(extent: int = 64, alphas=(0.3, 0.7), body_names=("square", "disk256"),
                 tol_override=None) -> SuiteReport:
    grid = perimeter_grid(extent)
    with _suite("coarea", tol_override) as rep:
        tol = rep.tol("coarea", 1e-8)
        for K in bodies(body_names):
            for a in alphas:
                model = KernelModel(K, a)
                for name, f in stock_functions(grid, K).items():
                    r = coarea_check(f, model)
                    rep.add(f"coarea[{name},{K.label},a={a:g}]", r.lhs, r.rhs, -r.rel_error, tol,
                            function=name, body=K.label, alpha=a, levels=r.levels)
    return rep


# ----------------------------------------------------------------------
# capacity suites

def _agreement_condensers(grid: Grid):
    m = np.zeros(grid.extent, dtype=bool)

    def mk(cells, label):
        mask = m.copy()
        for c in cells:
            mask[c] = True
        return GridSet(grid, mask, label)

    c = grid.extent[0] // 2
    return [
        mk([(c, c)], "single_cell"),
        mk([(c, c), (c - 1, c), (c, c - 1), (c - 1, c - 1)], "block2"),
        mk([(c + i, c + j) for i in range(-1, 2) for j in range(-1, 2)], "block3"),
        mk([(c, c + j) for j in range(-2, 3)] + [(c + i, c - 2) for i in range(1, 3)], "L_shape"),
        mk([(c - 3, c), (c + 3, c)], "two_cells"),
        mk([(c + i, c + j) for i in range(-2, 3) for j in range(-2, 3) if max(abs(i), abs(j)) == 2], "ring"),
    ]


def thm4_suite(tol_override=None) -> SuiteReport:
    """Min cut against the LP on 16 x 16 grids; min cut below 2 P of dilations."""
    grid = Grid.covering(2, 16, 2.0)
    cases = [("square", 0.5), ("disk256", 0.3), ("diamond", 0.7), ("hexagon", 0.9), ("square", 0.1)]
    conds = _agreement_condensers(grid)
    with _suite("thm4", tol_override) as rep:
        tol = rep.tol("agreement", 1e-6)
        k = 0
        for i, L in enumerate(conds):
            for j in (0, 1):
                if k >= 10:
                    break
                bname, a = cases[(i + 2 * j) % len(cases)]
                model = KernelModel(stock_body(bname), a)
                p = CapacityProblem(L, model)
                mc = capacity_mincut(p)
                lp = capacity_oracle(p)
                rep.add(f"mincut_vs_lp[{L.label},{bname},a={a:g}]", mc.value, lp, -_rel_err(mc.value, lp), tol,
                        condenser=L.label, body=bname, alpha=a)
                k += 1
        model = KernelModel(stock_body("square"), 0.5)
        for L in conds[:3]:
            res = capacity_mincut(CapacityProblem(L, model))
            inside = bool(np.all(res.optimal_set.mask[L.mask]))
            rep.add(f"optimal_contains_L[{L.label}]", 0.0, float(inside), float(inside) - 1.0, 0.0)
            for r in (1, 2):
                D = set_dilate(L, r * grid.spacing)
                up = 2 * frac_perimeter(D, model).value
                rep.add(f"upper_bound[{L.label},+{r}h]", res.value, up, _rel(res.value, up),
                        rep.tol("rounding", ROUNDING), condenser=L.label)
    return rep


def theorem1_suite(extent: int = 32, usc_cells: int = 128, usc_alphas=(0.9,),
                   usc_bodies=("square", "disk256"), tol_override=None) -> SuiteReport:
    """Homogeneity, monotonicity, subadditivity and upper semicontinuity."""
    grid = capacity_grid(extent)
    with _suite("theorem1", tol_override) as rep:
        L = box(grid, -1, 1, label="square")
        for bname in ("square", "disk256"):
            for a in (0.3, 0.7):
                model = KernelModel(stock_body(bname), a)
                hc = capacity_homogeneity_check(L, model, s=2, r=2.0)
                rep.add(f"homogeneity_body[{bname},a={a:g}]", hc["cap_rK"], 2 ** (2 + a) * hc["cap"],
                        -hc["residual_body"], rep.tol("homogeneity_body", 1e-10), body=bname, alpha=a)
                rep.add(f"homogeneity_set[{bname},a={a:g}]", hc["cap_sL"], 2 ** (2 - a) * hc["cap"],
                        -hc["residual_set"], rep.tol("homogeneity_set", 5e-2), body=bname, alpha=a)
        cache = CapCache()
        pairs = [
            (box(grid, -0.5, 0.5, label="small"), box(grid, -1, 1, label="square")),
            (ball(grid, stock_body("diamond"), 1.0, label="diamond"), box(grid, -1, 1, label="square")),
            (box(grid, [-1, -0.5], [0, 0.5], label="half"), box(grid, [-1, -0.5], [1, 0.5], label="bar")),
        ]
        left = box(grid, [-1.5, -0.5], [-0.5, 0.5], label="left")
        right = box(grid, [0.5, -0.5], [1.5, 0.5], label="right")
        shifted = box(grid, [-1.0, -0.5], [0.0, 0.5], label="shifted")
        subs = [(left, left), (left, right), (left, shifted),
                (box(grid, -0.3, 0.3, label="tiny"), box(grid, [0.3, 0.3], [0.9, 0.9], label="corner"))]
        for bname in ("square", "disk256", "hexagon"):
            for a in (0.3, 0.7):
                model = KernelModel(stock_body(bname), a)
                for L1, L2 in pairs:
                    c1, c2 = cache(L1, model).value, cache(L2, model).value
                    rep.add(f"monotone[{L1.label}<={L2.label},{bname},a={a:g}]", c1, c2, c2 - c1,
                            rep.tol("exact", 0.0), body=bname, alpha=a)
                for L1, L2 in subs:
                    c1, c2 = cache(L1, model).value, cache(L2, model).value
                    c12 = cache(L1.union(L2), model).value
                    rep.add(f"subadditive[{L1.label}+{L2.label},{bname},a={a:g}]", c12, c1 + c2, c1 + c2 - c12,
                            rep.tol("exact", 0.0), body=bname, alpha=a)
        # usc: a large condenser inside a ring domain, dilations 4h, 2h, h
        h = 1.0 / 32
        m = usc_cells
        ext = m + 22
        ug = Grid(2, (ext, ext), h, (-ext * h / 2, -ext * h / 2))
        Lu = box(ug, -m * h / 2 + h / 4, m * h / 2 - h / 4, label=f"square{m}")
        dom = ring_domain(Lu, 7)
        for bname in usc_bodies:
            for a in usc_alphas:
                model = KernelModel(stock_body(bname), a)
                seq = [cache(set_dilate(Lu, r * h), model, dom).value for r in (4, 2, 1)]
                base = cache(Lu, model, dom).value
                steps = np.diff(seq + [base])
                rep.add(f"usc_monotone[{bname},a={a:g}]", 0.0, float(-steps.max()), float(-steps.max()),
                        rep.tol("exact", 0.0), body=bname, alpha=a, caps=seq, cap_L=base)
                gap = (seq[-1] - base) / base
                rep.add(f"usc_gap[{bname},a={a:g}]", gap, 0.02, 0.02 - gap, rep.tol("usc_gap", 0.0),
                        body=bname, alpha=a, cells=m)
        rep.notes.append("usc uses a 7-cell ring domain around the condenser")
    return rep


def cor5_suite(alphas=ALPHA_SWEEP, extent: int = 40, body_names=None, cache=None,
               tol_override=None) -> SuiteReport:
    """Isocapacitary deficits and both alpha limits of the capacity."""
    grid = capacity_grid(extent)
    cache = cache or CapCache()
    with _suite("cor5", tol_override) as rep:
        tol = rep.tol("deficit", 1e-3)
        Ks = bodies(body_names)
        for K in Ks:
            sets = stock_sets(grid, K)
            for a in alphas:
                model = KernelModel(K, a)
                n = 2
                for name, L in sets.items():
                    cap = cache(L, model)
                    rhs = 2 * n * model.volume_K ** ((n + a) / n) * L.volume ** ((n - a) / n)
                    d = a * cap.value / rhs - 1.0
                    rep.add(f"isocap[{name},{K.label},a={a:g}]", rhs, a * cap.value, d, tol,
                            a * cap.truncation_bound / rhs, set=name, body=K.label, alpha=a,
                            gamma_lower=n / a * model.volume_K ** ((n + a) / n))
        a0, a1 = [0.1, 0.05, 0.025], [0.8, 0.9, 0.95]
        for K in Ks:
            for name in ("square", "diamond"):
                L = stock_sets(grid, K)[name]
                vals = [a * cache(L, KernelModel(K, a)).value for a in a0]
                ext = linear_extrapolate(a0, vals, 0.0)
                tgt = 2 * 2 * L.volume * KernelModel(K, 0.5).volume_K
                rep.add(f"cap_alpha0[{name},{K.label}]", ext, tgt, -_rel_err(ext, tgt), rep.tol("alpha_to_0", 0.15),
                        set=name, body=K.label)
            for L in (box(grid, -1, 1, label="square"), box(grid, [-1.2, -0.6], [1.2, 0.6], label="rectangle")):
                vals = [(1 - a) * cache(L, KernelModel(K, a)).value for a in a1]
                ext = linear_extrapolate(a1, vals, 1.0)
                tgt = capacity_first_order(L, K).value
                rep.add(f"cap_alpha1[{L.label},{K.label}]", ext, tgt, -_rel_err(ext, tgt),
                        rep.tol("alpha_to_1", 0.10), set=L.label, body=K.label)
    return rep


# ----------------------------------------------------------------------
# measure, capacity and perimeter equivalences

def _family(grid, K):
    sets = stock_sets(grid, K)
    fns = stock_functions(grid, K)
    return sets, fns


def thm6_suite(alphas=ALPHAS, betas=None, extent: int = 40, body_names=None, cache=None,
               tol_override=None) -> SuiteReport:
    """Measure against capacity on sets, and the level-set capacity integral
    against the ``L^{n/beta}_mu`` norm on functions, for Lebesgue and a bounded density.

    With ``beta = n - alpha`` the constant is ``M^{(n-a)/n} alpha / (2n V(K)^{(n+a)/n})``;
    for other ``beta`` it is calibrated as the largest ratio over the family,
    level sets included, so only the step from sets to functions is on trial.
    """
    grid = capacity_grid(extent)
    cache = cache or CapCache()
    n = 2
    with _suite("thm6", tol_override) as rep:
        tol = rep.tol("rounding", ROUNDING)
        tol_c = rep.tol("collapse", 1e-10)
        for K in bodies(body_names):
            sets, fns = _family(grid, K)
            for a in alphas:
                model = KernelModel(K, a)
                for beta in (betas or (n - a, n / 2, n)):
                    p = n / beta
                    for mname, mu in stock_measures(grid).items():
                        every = list(sets.values()) + [E for f in fns.values() for _, E in _level_sets(f)]
                        if abs(beta - (n - a)) < 1e-12:
                            kappa, source = isoperimetric_kappa(model, mu.bound), "analytic"
                        else:
                            kappa = max(mu(E) ** (1 / p) / cache(E, model).value for E in every)
                            source = "calibrated"
                        tag = f"{K.label},a={a:g},b={beta:g},{mname}"
                        set_margin = {}
                        for name, E in sets.items():
                            lhs, rhs = mu(E) ** (1 / p), kappa * cache(E, model).value
                            set_margin[name] = _rel(lhs, rhs)
                            rep.add(f"mu_cap_set[{name},{tag}]", lhs, rhs, set_margin[name], tol,
                                    kappa=kappa, kappa_source=source)
                        for name, f in fns.items():
                            lv = _level_sets(f)
                            lhs = lebesgue_mu_norm(f, mu, beta).value
                            rhs = kappa * level_capacity_integral([t for t, _ in lv],
                                                                  [cache(E, model).value for _, E in lv], beta, n)
                            m = _rel(lhs, rhs)
                            rep.add(f"mu_cap_fn[{name},{tag}]", lhs, rhs, m, tol, kappa=kappa, kappa_source=source)
                            if name == "indicator":
                                d = abs(m - set_margin["square"])
                                rep.add(f"collapse_fn_set[{tag}]", m, set_margin["square"], -d, tol_c)
    return rep


def thm7_suite(alphas=ALPHAS, betas=None, extent: int = 40, body_names=None, cache=None,
               tol_override=None) -> SuiteReport:
    """``cap <= 2 P_alpha`` on sets, the level-set capacity integral against the
    seminorm on functions, and the decrease of ``t -> cap(O_t)``."""
    grid = capacity_grid(extent)
    cache = cache or CapCache()
    n = 2
    with _suite("thm7", tol_override) as rep:
        tol = rep.tol("rounding", ROUNDING)
        for K in bodies(body_names):
            sets, fns = _family(grid, K)
            for a in alphas:
                model = KernelModel(K, a)
                tag = f"{K.label},a={a:g}"
                for name, E in sets.items():
                    c = cache(E, model)
                    per = frac_perimeter(E, model)
                    rep.add(f"cap_le_2per[{name},{tag}]", c.value, 2 * per.value, _rel(c.value, 2 * per.value), tol,
                            (c.truncation_bound + 2 * per.truncation_bound) / (2 * per.value))
                for name, f in fns.items():
                    lv = _level_sets(f)
                    caps = [cache(E, model).value for _, E in lv]
                    steps = np.diff(caps)
                    worst = float(steps.max() / max(caps)) if len(steps) else 0.0
                    rep.add(f"cap_decreasing[{name},{tag}]", 0.0, -worst, -worst, tol)
                    norm = seminorm(f, model)
                    for beta in (betas or (n - a, n / 2, n)):
                        lhs = level_capacity_integral([t for t, _ in lv], caps, beta, n)
                        rep.add(f"level_cap_le_seminorm[{name},{tag},b={beta:g}]", lhs, norm, _rel(lhs, norm), tol)
                    if name == "indicator":
                        E = sets["square"]
                        lhs = level_capacity_integral([1.0], [cache(E, model).value], n - a, n)
                        d = abs(_rel(lhs, norm) - _rel(cache(E, model).value, 2 * frac_perimeter(E, model).value))
                        rep.add(f"collapse_fn_set[{tag}]", 0.0, d, -d, rep.tol("collapse", 1e-10))
    return rep


def thm8_suite(alphas=ALPHAS, betas=None, extent: int = 40, body_names=None, cache=None,
               tol_override=None) -> SuiteReport:
    """Sobolev (i), isocapacitary (ii) and isoperimetric (iii) with one constant.

    ``beta = n - alpha`` uses the analytic constant; other ``beta`` take the
    largest ratio ``mu(O)^{beta/n} / (2 P(O))`` over the sets, the level sets
    and their min-cut sets.  A function for which (iii) holds on every level
    set while (i) fails is a counter-pattern.  Halving the analytic constant
    must break (ii) and (iii) on the ball of ``K`` at the smallest alpha.
    """
    grid = capacity_grid(extent)
    cache = cache or CapCache()
    n = 2
    with _suite("thm8", tol_override) as rep:
        tol = rep.tol("rounding", ROUNDING)
        counter = []
        for K in bodies(body_names):
            sets, fns = _family(grid, K)
            for a in alphas:
                model = KernelModel(K, a)
                per_cache = {}

                def per(E):
                    key = E.mask.tobytes()
                    if key not in per_cache:
                        per_cache[key] = frac_perimeter(E, model).value
                    return per_cache[key]

                level = {name: _level_sets(f) for name, f in fns.items()}
                pool = list(sets.values()) + [E for lv in level.values() for _, E in lv]
                pool += [cache(E, model).optimal_set for E in pool]
                for beta in (betas or (n - a, n / 2, n)):
                    p = n / beta
                    for mname, mu in stock_measures(grid).items():
                        if abs(beta - (n - a)) < 1e-12:
                            kappa, source = isoperimetric_kappa(model, mu.bound), "analytic"
                        else:
                            kappa = max(mu(E) ** (1 / p) / (2 * per(E)) for E in pool)
                            source = "calibrated"
                        tag = f"{K.label},a={a:g},b={beta:g},{mname}"
                        iii = {}
                        for name, E in sets.items():
                            lhs = mu(E) ** (1 / p)
                            m2 = _rel(lhs, kappa * cache(E, model).value)
                            m3 = _rel(lhs, 2 * kappa * per(E))
                            iii[name] = m3
                            rep.add(f"isocap[{name},{tag}]", lhs, kappa * cache(E, model).value, m2, tol,
                                    kappa=kappa, kappa_source=source)
                            rep.add(f"isoper[{name},{tag}]", lhs, 2 * kappa * per(E), m3, tol,
                                    kappa=kappa, kappa_source=source)
                        for name, f in fns.items():
                            lhs = lebesgue_mu_norm(f, mu, beta).value
                            rhs = kappa * seminorm(f, model)
                            m1 = _rel(lhs, rhs)
                            rep.add(f"sobolev[{name},{tag}]", lhs, rhs, m1, tol, kappa=kappa, kappa_source=source)
                            levels_ok = all(mu(E) ** (1 / p) <= 2 * kappa * per(E) * (1 + tol) for _, E in level[name])
                            if levels_ok and m1 < -tol:
                                counter.append(f"{name},{tag}")
                            if name == "indicator":
                                d = abs(m1 - iii["square"])
                                rep.add(f"collapse_sobolev_isoper[{tag}]", m1, iii["square"], -d, rep.tol("collapse", 1e-10))
            # negative control: half the analytic constant at the smallest alpha
            a = min(alphas)
            model = KernelModel(K, a)
            E = sets["kball"]
            half = 0.5 * isoperimetric_kappa(model)
            lhs = E.volume ** ((n - a) / n)
            m2 = _rel(lhs, half * cache(E, model).value)
            m3 = _rel(lhs, 2 * half * frac_perimeter(E, model).value)
            rep.add(f"halved_kappa_fails[{K.label},a={a:g}]", max(m2, m3), 0.0, -max(m2, m3), 0.0,
                    margin_ii=m2, margin_iii=m3)
        rep.add("no_counter_pattern", float(len(counter)), 0.0, -float(len(counter)), 0.0, cases=counter)
    return rep


def first_order_suite(tol_override=None) -> SuiteReport:
    """Anisotropic isoperimetric inequality on polygons, and first-order capacity
    bounds on convex condensers."""
    hexagon, diamond = stock_body("hexagon"), stock_body("diamond")
    polys = {
        "square": Polygon([[-1, -1], [1, -1], [1, 1], [-1, 1]], "square"),
        "rectangle": Polygon([[-1.2, -0.6], [1.2, -0.6], [1.2, 0.6], [-1.2, 0.6]], "rectangle"),
        "diamond": Polygon.from_body(diamond),
        "hexagon": Polygon.from_body(hexagon),
        "disk256": Polygon.from_body(stock_body("disk256")),
        "L_shape": Polygon([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]], "L_shape"),
    }
    n = 2
    with _suite("first_order") as rep:
        tol = rep.tol("rounding", 1e-9 if tol_override is None else tol_override)
        for K in bodies():
            Z = MomentBody(K)
            vz = Z.volume()
            kappa5 = 1.0 / (2 * n * vz ** (1 / n))
            for name, P in polys.items():
                lhs = n * K.volume() ** (1 / n) * P.area ** ((n - 1) / n)
                rhs = anisotropic_perimeter(P, K)
                rep.add(f"aniso_isoper[{name},{K.label}]", lhs, rhs, _rel(lhs, rhs), tol, polygon=name, body=K.label)
                if not P.is_convex():
                    rep.notes.append(f"{name} is not convex; first-order capacity skipped")
                    continue
                fo = capacity_first_order(P, K, moment=Z)
                rep.add(f"cap_volume_bound[{name},{K.label}]", fo.volume_bound, fo.value, _rel(fo.volume_bound, fo.value), tol,
                        volume_Z1K=vz)
                lhs5 = P.area ** ((n - 1) / n)
                rep.add(f"first_order_isocap[{name},{K.label}]", lhs5, kappa5 * fo.value, _rel(lhs5, kappa5 * fo.value), tol,
                        kappa=kappa5)
                # the bound with the polar moment body is reported alongside
                rep.add(f"cap_eq_2moment_per[{name},{K.label}]", fo.value, 2 * anisotropic_perimeter(P, Z),
                        _rel(fo.value, 2 * anisotropic_perimeter(P, Z)), tol)
                rep.notes.append(f"polar moment bound {name},{K.label}: 2P(L,Z1K) = {fo.value:.12g}, "
                                 f"2P(L,Z1*K) = {fo.polar_variant:.12g}, polar variant "
                                 f"{'holds' if fo.value <= fo.polar_variant * (1 + tol) else 'fails'}")
                # V(O)^{(n-1)/n} <= 2 kappa P(O, Z1 K)
                rhs7 = 2 * kappa5 * anisotropic_perimeter(P, Z)
                rep.add(f"first_order_isoper[{name},{K.label}]", lhs5, rhs7, _rel(lhs5, rhs7), tol)
            # first-order Sobolev inequality on the polygonal tent f = max(0, 1 - ||x||_Q), Q = K:
            # ||f||_{L^2} = sqrt(V(Q)/6), int h_{Z1K}(grad f) = P(Q, Z1 K)/2, and the
            # gradient functional is the alpha -> 1 limit, twice that integral
            Q = Polygon.from_body(K)
            lhs = np.sqrt(Q.area / 6.0)
            grad = 2.0 * 0.5 * anisotropic_perimeter(Q, Z)
            rep.add(f"first_order_sobolev[tent,{K.label}]", lhs, kappa5 * grad, _rel(lhs, kappa5 * grad), tol)
            rep.notes.append(f"first_order_sobolev {K.label}: with the single co-area integral the right side is "
                             f"{kappa5 * grad / 2:.12g} against {lhs:.12g}")
    return rep


# ----------------------------------------------------------------------
# aggregate

SUITES = ("geometry", "kernel_tail", "theorem1", "prop2", "thm3", "thm4", "cor5", "limits", "coarea",
          "thm6", "thm7", "thm8", "first_order")


@dataclass
class AggregateReport:
    suites: dict
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites.values())

    def to_dict(self, timing: bool = False):
        return {"passed": self.passed, "config": self.config,
                "suites": {k: self.suites[k].to_dict(timing) for k in sorted(self.suites)}}


def run_suite(name: str, config=None, cache: CapCache | None = None) -> SuiteReport:
    from .config import RunConfig

    cfg = config or RunConfig()
    tol = cfg.tolerance
    seed = cfg.seed
    alphas = tuple(cfg.alphas) if cfg.alphas else None
    betas = tuple(cfg.betas) if cfg.betas else None
    cache = cache or CapCache()
    if name == "geometry":
        return geometry_suite(seed, tol_override=tol)
    if name == "kernel_tail":
        return kernel_tail_suite(seed, tol_override=tol)
    if name == "theorem1":
        return theorem1_suite(tol_override=tol)
    if name == "prop2":
        return prop2_suite(tol_override=tol)
    if name == "thm3":
        return thm3_suite(alphas or ALPHA_SWEEP, tol_override=tol)
    if name == "thm4":
        return thm4_suite(tol_override=tol)
    if name == "cor5":
        return cor5_suite(alphas or ALPHA_SWEEP, cache=cache, tol_override=tol)
    if name == "limits":
        return limits_suite(tol_override=tol)
    if name == "coarea":
        return coarea_suite(tol_override=tol)
    if name in ("thm6", "thm7", "thm8"):
        fn = {"thm6": thm6_suite, "thm7": thm7_suite, "thm8": thm8_suite}[name]
        return fn(alphas or ALPHAS, betas, cache=cache, tol_override=tol)
    if name == "first_order":
        return first_order_suite(tol_override=tol)
    raise LabError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")


def run_all(config=None, progress=None) -> AggregateReport:
    """Run the configured suites (all by default) with one shared capacity cache."""
    from .config import RunConfig

    cfg = config or RunConfig()
    names = list(cfg.suites) if cfg.suites else list(SUITES)
    for nm in names:
        if nm not in SUITES:
            raise LabError(f"unknown suite {nm!r}; choose from {', '.join(SUITES)}")
    cache = CapCache()
    out = {}
    for nm in names:
        out[nm] = run_suite(nm, cfg, cache)
        if progress is not None:
            progress(out[nm])
    return AggregateReport(out, cfg.to_dict())
