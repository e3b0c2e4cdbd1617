"""Fractional perimeter, the seminorm, co-area and limiting regimes."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from . import _backend
from .geometry import ConvexBody, MomentBody, Polygon, anisotropic_perimeter
from .grid import GridFunction, GridSet, level_set
from .kernel import KernelModel, grid_codes, set_gauge_diameter


class PerimeterError(ValueError):
    pass


@dataclass
class PerimeterResult:
    value: float
    truncation_bound: float
    alpha: float
    body: str
    set_label: str
    cells: int = 0

    def to_dict(self):
        return dict(self.__dict__)


def _bbox_cells(cells):
    lo = cells.min(axis=0)
    return cells - lo, cells.max(axis=0) - lo + 1


def pair_sum(cells, model: KernelModel, h: float, other=None) -> float:
    """``sum_{A in S, B in T, A != B} W(B - A)`` in physical units (``T = S`` by default)."""
    cells = np.asarray(cells)
    if len(cells) == 0 or (other is not None and len(other) == 0):
        return 0.0
    both = cells if other is None else np.vstack([cells, other])
    lo = both.min(axis=0)
    he = both.max(axis=0) - lo + 1
    table = model.table(he, h)
    ca, center = grid_codes(cells - lo, he)
    cb = ca if other is None else grid_codes(np.asarray(other) - lo, he)[0]
    return float(np.sum(_backend.cross_sum(ca, cb, table.ravel(), center)))


def _drops_pairs(cells, model: KernelModel, h: float) -> bool:
    if model.trunc_radius is None or len(cells) < 2:
        return False
    return set_gauge_diameter(model.body, cells * h) > model.trunc_radius


def perimeter_of_cells(cells, model: KernelModel, h: float):
    """``(P, bound)`` for the union of the given cells."""
    n = len(cells)
    if n == 0:
        return 0.0, 0.0
    value = n * model.self_mass(h) - pair_sum(cells, model, h)
    bound = n * model.truncation_tail(h) if _drops_pairs(cells, model, h) else 0.0
    return value, bound


def frac_perimeter(E: GridSet, model: KernelModel) -> PerimeterResult:
    """``P_alpha(E, K) = int_E int_{E^c} ||x - y||_K^{-(n+alpha)} dx dy``.

    Exact for the union of cells up to quadrature rounding when no pair is
    truncated; otherwise pairs of ``E`` beyond ``R`` are counted as leaving
    ``E`` and ``truncation_bound`` bounds the resulting overcount.
    """
    if E.grid.dim != model.dim:
        raise PerimeterError("set and body dimensions differ")
    value, bound = perimeter_of_cells(E.cells(), model, E.grid.spacing)
    return PerimeterResult(value, bound, model.alpha, model.body.label, E.label, E.count)


def seminorm(f: GridFunction, model: KernelModel) -> float:
    """``int int |f(x) - f(y)| ||x - y||_K^{-(n+alpha)} dx dy``."""
    return seminorm_with_bound(f, model)[0]


def seminorm_with_bound(f: GridFunction, model: KernelModel):
    h = f.grid.spacing
    supp = f.values != 0
    if not supp.any():
        return 0.0, 0.0
    vals = f.values[supp]
    distinct = np.unique(vals)
    if len(distinct) == 1:
        # a multiple of an indicator goes through the perimeter path
        res = frac_perimeter(GridSet(f.grid, supp, f.label), model)
        c = abs(float(distinct[0]))
        return 2.0 * c * res.value, 2.0 * c * res.truncation_bound
    cells = np.argwhere(supp)
    cells, he = _bbox_cells(cells)
    table = model.table(he, h)
    codes, center = grid_codes(cells, he)
    tot, rows = _backend.absdiff_sum(codes, vals, table.ravel(), center)
    absf = np.abs(vals)
    value = tot + 2.0 * float(np.dot(absf, model.self_mass(h) - rows))
    bound = 2.0 * float(absf.sum()) * model.truncation_tail(h) if _drops_pairs(cells, model, h) else 0.0
    return value, bound


def level_perimeters(f: GridFunction, model: KernelModel):
    """Levels ``t_1 < ... < t_L`` of ``|f|`` and ``P({|f| >= t_k})``.

    Nested level sets are processed from the top so each cell enters the
    pair sum once: the cost is that of one full pair sum.
    """
    h = f.grid.spacing
    levels = f.levels()
    if len(levels) == 0:
        return levels, np.zeros(0), np.zeros(0)
    absf = np.abs(f.values)
    C = model.self_mass(h)
    allcells = np.argwhere(absf > 0)
    lo = allcells.min(axis=0)
    he = allcells.max(axis=0) - lo + 1
    table = model.table(he, h).ravel()
    per = np.empty(len(levels))
    bounds = np.empty(len(levels))
    inner = np.zeros((0,), dtype=np.int64)
    inner_pairs = 0.0
    for k in range(len(levels) - 1, -1, -1):
        ring = np.argwhere(absf == levels[k]) - lo
        rc, center = grid_codes(ring, he)
        cross = float(np.sum(_backend.cross_sum(inner, rc, table, center))) if len(inner) else 0.0
        own = float(np.sum(_backend.cross_sum(rc, rc, table, center)))
        inner_pairs += 2.0 * cross + own
        inner = np.concatenate([inner, rc])
        per[k] = len(inner) * C - inner_pairs
        cells_k = np.argwhere(absf >= levels[k])
        bounds[k] = len(inner) * model.truncation_tail(h) if _drops_pairs(cells_k, model, h) else 0.0
    return levels, per, bounds


@dataclass
class CoareaResult:
    lhs: float
    rhs: float
    rel_error: float
    levels: int


def coarea_check(f: GridFunction, model: KernelModel, t_samples: int | None = None) -> CoareaResult:
    """Compare ``||f||`` with ``2 int_0^inf P({|f| > t}) dt``.

    By default the right side is summed exactly over the distinct levels,
    where the level set is constant in ``t``.  With ``t_samples`` the
    integral is instead a trapezoid rule on that many equispaced levels.
    """
    lhs = seminorm(f, model)
    if t_samples is None:
        levels, per, _ = level_perimeters(f, model)
        if len(levels) == 0:
            return CoareaResult(0.0, 0.0, 0.0, 0)
        steps = np.diff(np.concatenate([[0.0], levels]))
        rhs = 2.0 * float(np.dot(steps, per))
        nlev = len(levels)
    else:
        if t_samples < 2:
            raise PerimeterError("t_samples must be at least 2")
        top = float(np.abs(f.values).max())
        ts = np.linspace(0.0, top, t_samples)
        vals = [frac_perimeter(level_set(f, t), model).value for t in ts]
        rhs = 2.0 * float(trapezoid(vals, ts))
        nlev = t_samples
    if lhs == 0.0:
        return CoareaResult(lhs, rhs, 0.0 if rhs == 0.0 else np.inf, nlev)
    return CoareaResult(lhs, rhs, abs(lhs - rhs) / lhs, nlev)


@dataclass
class CyclicResult:
    margin: float
    rel_margin: float
    lhs: float
    rhs: float
    bound: float
    alphas: tuple

    @property
    def passed(self):
        return self.margin >= -self.bound


def cyclic_inequality_check(E: GridSet, K: ConvexBody, alphas, **model_kw) -> CyclicResult:
    """``P_b^{g-a} <= P_a^{g-b} P_g^{b-a}`` for ``a < b < g``.

    The three perimeters share one truncation radius, so each is the same
    double integral over a fixed pair region and Hoelder's inequality
    applies to the computed values themselves.  ``bound`` propagates the
    truncation bounds to first order plus a rounding allowance.
    """
    a, b, g = (float(x) for x in alphas)
    if not 0.0 < a < b < g < 1.0:
        raise PerimeterError("need 0 < alpha < beta < gamma < 1")
    res = [frac_perimeter(E, KernelModel(K, x, **model_kw)) for x in (a, b, g)]
    Pa, Pb, Pg = (r.value for r in res)
    lhs = Pb ** (g - a)
    rhs = Pa ** (g - b) * Pg ** (b - a)
    da, db, dg = (r.truncation_bound for r in res)
    bound = rhs * ((g - b) * da / Pa + (b - a) * dg / Pg) + lhs * (g - a) * db / Pb
    bound += 1e-12 * max(lhs, rhs)
    return CyclicResult(rhs - lhs, rhs / lhs - 1.0, lhs, rhs, bound, (a, b, g))


@dataclass
class LimitResult:
    alphas: list
    values: list
    extrapolated: float
    target: float
    rel_error: float
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return dict(self.__dict__)


def linear_extrapolate(x, y, at: float) -> float:
    coef = np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)
    return float(np.polyval(coef, at))


def limit_alpha0(E: GridSet, K: ConvexBody, alphas, **model_kw) -> LimitResult:
    """Extrapolate ``alpha P_alpha(E, K)`` to ``alpha = 0``; target ``n V(E) V(K)``."""
    alphas = [float(a) for a in alphas]
    if len(alphas) < 3:
        raise PerimeterError("need at least three alpha values")
    if not all(0 < a <= 0.2 for a in alphas):
        raise PerimeterError("alpha values for the small-alpha limit must lie in (0, 0.2]")
    vals = [a * frac_perimeter(E, KernelModel(K, a, **model_kw)).value for a in alphas]
    ext = linear_extrapolate(alphas, vals, 0.0)
    model = KernelModel(K, alphas[0], **model_kw)
    target = K.dim * E.volume * model.volume_K
    return LimitResult(alphas, vals, ext, target, abs(ext - target) / target)


def limit_alpha1(E: GridSet, K: ConvexBody, alphas, polygon: Polygon | None = None, **model_kw) -> LimitResult:
    """Extrapolate ``(1 - alpha) P_alpha(E, K)`` to ``alpha = 1``; target ``P(E, Z1 K)``."""
    alphas = [float(a) for a in alphas]
    if len(alphas) < 3:
        raise PerimeterError("need at least three alpha values")
    if not all(0.8 <= a < 1 for a in alphas):
        raise PerimeterError("alpha values for the alpha -> 1 limit must lie in [0.8, 1)")
    poly = polygon if polygon is not None else E.polygon
    if poly is None:
        raise PerimeterError("the alpha -> 1 target needs the polygon form of the set")
    vals = [(1 - a) * frac_perimeter(E, KernelModel(K, a, **model_kw)).value for a in alphas]
    ext = linear_extrapolate(alphas, vals, 1.0)
    target = anisotropic_perimeter(poly, MomentBody(K))
    return LimitResult(alphas, vals, ext, target, abs(ext - target) / target)


@dataclass
class IsoResult:
    deficit: float
    lhs: float
    rhs: float
    truncation_bound: float = 0.0

    @property
    def trivial(self):
        return np.isinf(self.deficit)


def isoperimetric_ratio_rhs(K_volume: float, n: int, alpha: float, volume: float) -> float:
    """``n V(K)^{(n+alpha)/n} V(E)^{(n-alpha)/n}``."""
    return n * K_volume ** ((n + alpha) / n) * volume ** ((n - alpha) / n)


def isoperimetric_check(E: GridSet, model: KernelModel) -> IsoResult:
    """Deficit ``alpha P / (n V(K)^{(n+a)/n} V(E)^{(n-a)/n}) - 1`` (``+inf`` if ``V(E) = 0``)."""
    if E.volume == 0:
        return IsoResult(np.inf, 0.0, 0.0)
    res = frac_perimeter(E, model)
    lhs = model.alpha * res.value
    rhs = isoperimetric_ratio_rhs(model.volume_K, model.dim, model.alpha, E.volume)
    return IsoResult(lhs / rhs - 1.0, lhs, rhs, model.alpha * res.truncation_bound / rhs)
