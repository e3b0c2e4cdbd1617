"""Pair weights of the kernel ``||x - y||_K^{-(n+alpha)}`` between grid cells.

For cells ``A`` and ``B = A + d h`` the weight is

    W(d) = int_A int_B ||x - y||_K^{-(n+alpha)} dx dy
         = h^(n-alpha) * int T_d(z) g(z) dz,

with ``g = ||z||_K^{-(n+alpha)}`` and ``T_d`` the product tent of half-width
one centred at ``d``.  In the plane the ``polar`` scheme evaluates this
integral in polar coordinates: the radial part is closed form (``T_d`` is
piecewise bilinear) and the angular part is Gauss-Legendre between the
angles where either ``T_d`` or the gauge has a kink, so the result is exact
to quadrature rounding.  The ``subdiv`` scheme (any dimension) uses the
midpoint rule for separated pairs and a tensor-midpoint refinement for
pairs within ``near_radius`` cells.

The self mass ``C = int g (1 - T_0)`` is the weight one cell sends to the
rest of space; lattice translates of the tents sum to one, so
``C = sum_{d != 0} W(d)`` and the perimeter of a union of cells ``S`` is
``|S| C - sum_{A != B in S} W(B - A)`` (times ``h^(n-alpha)``).
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import integrate

from . import _backend
from .geometry import ConvexBody, GeometryError


class KernelError(ValueError):
    pass


SCHEMES = ("auto", "polar", "subdiv")


def _exact_volume(K: ConvexBody) -> float:
    if K.dim == 2:
        return K.volume()
    from scipy.spatial import ConvexHull

    return float(ConvexHull(K.vertices).volume)


class KernelModel:
    """Kernel parameters plus cached unit-spacing weight tables.

    Parameters
    ----------
    body : ConvexBody
    alpha : float
        Order in ``(0, 1)``.
    near_radius : int
        Pairs with centre distance up to this many cells are refined
        (``subdiv`` scheme only).
    trunc_radius : float or None
        Interaction radius ``R`` in length units; pairs farther apart are
        treated as leaving the set.  ``None`` keeps every pair.
    subdiv : int
        Per-axis refinement factor for near pairs.
    scheme : {"auto", "polar", "subdiv"}
        ``auto`` selects ``polar`` in the plane and ``subdiv`` otherwise.
    gauss_order : int
        Gauss-Legendre nodes per angular subinterval.
    """

    def __init__(self, body: ConvexBody, alpha: float, near_radius: int = 3, trunc_radius=None,
                 subdiv: int = 8, scheme: str = "auto", gauss_order: int = 16, self_radius: int = 48):
        if not 0.0 < alpha < 1.0:
            raise KernelError("alpha must lie in (0, 1)")
        if near_radius < 1:
            raise KernelError("near_radius must be at least 1")
        if subdiv < 1:
            raise KernelError("subdiv must be positive")
        if scheme not in SCHEMES:
            raise KernelError(f"scheme must be one of {SCHEMES}")
        if scheme == "auto":
            scheme = "polar" if body.dim == 2 else "subdiv"
        if scheme == "polar" and body.dim != 2:
            raise KernelError("the polar scheme is planar only")
        if trunc_radius is not None and not trunc_radius > 0:
            raise KernelError("trunc_radius must be positive")
        self.body = body
        self.alpha = float(alpha)
        self.near_radius = int(near_radius)
        self.trunc_radius = None if trunc_radius is None else float(trunc_radius)
        self.subdiv = int(subdiv)
        self.scheme = scheme
        self.gauss_order = int(gauss_order)
        self.self_radius = int(self_radius)
        self.dim = body.dim
        self._table = None
        self._self_mass = None
        self._volume = None

    def __repr__(self):
        return (f"KernelModel({self.body.label!r}, alpha={self.alpha:g}, scheme={self.scheme!r}, "
                f"trunc_radius={self.trunc_radius})")

    def replace(self, **kw) -> "KernelModel":
        args = dict(body=self.body, alpha=self.alpha, near_radius=self.near_radius,
                    trunc_radius=self.trunc_radius, subdiv=self.subdiv, scheme=self.scheme,
                    gauss_order=self.gauss_order, self_radius=self.self_radius)
        args.update(kw)
        return KernelModel(**args)

    @property
    def volume_K(self) -> float:
        if self._volume is None:
            self._volume = _exact_volume(self.body)
        return self._volume

    # ------------------------------------------------------------------
    # unit-spacing quantities

    def gauge_power(self, z):
        """``g(z) = ||z||_K^{-(n+alpha)}``."""
        with np.errstate(divide="ignore"):
            return self.body.gauge(z) ** (-(self.dim + self.alpha))

    def unit_table(self, half_extent) -> np.ndarray:
        """Weights for offsets ``|d_i| < half_extent_i`` at unit spacing.

        The array has shape ``2 * half_extent - 1`` with offset zero at the
        centre (where the entry is zero).  Tables are cached and sliced.
        """
        he = tuple(int(x) for x in np.broadcast_to(half_extent, (self.dim,)))
        if min(he) < 1:
            raise KernelError("table extent must be positive")
        if self._table is None or any(a > b for a, b in zip(he, self._table_he)):
            grow = he if self._table is None else tuple(max(a, b) for a, b in zip(he, self._table_he))
            self._table = self._compute_table(grow)
            self._table_he = grow
        sl = tuple(slice(b - a, b + a - 1) for a, b in zip(he, self._table_he))
        return self._table[sl]

    def _compute_table(self, he):
        if self.scheme == "polar":
            K = self.body
            return _backend.weight_table_2d(np.ascontiguousarray(K.normals), np.ascontiguousarray(K.offsets),
                                            np.ascontiguousarray(K.vertex_angles), self.alpha,
                                            he[0], he[1], self.gauss_order)
        return self._subdiv_table(he)

    def _subdiv_table(self, he):
        n, s = self.dim, self.subdiv
        axes = [np.arange(-(a - 1), a) for a in he]
        d = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n).astype(float)
        out = self.gauge_power(d)
        near = (np.linalg.norm(d, axis=1) <= self.near_radius) & np.any(d != 0, axis=1)
        if np.any(near):
            k = np.arange(-(s - 1), s)
            kk = np.stack(np.meshgrid(*([k] * n), indexing="ij"), axis=-1).reshape(-1, n)
            wk = np.prod(s - np.abs(kk), axis=1) / float(s) ** (2 * n)
            for i in np.flatnonzero(near):
                out[i] = float(np.dot(wk, self.gauge_power(d[i] + kk / s)))
        out[np.all(d == 0, axis=1)] = 0.0
        return out.reshape(tuple(2 * a - 1 for a in he))

    def unit_weight(self, d) -> float:
        """``W(d)`` at unit spacing for a single integer offset."""
        d = np.asarray(d, dtype=int)
        if d.shape != (self.dim,):
            raise KernelError(f"offset must have {self.dim} components")
        if not d.any():
            raise KernelError("diagonal excluded")
        he = np.abs(d) + 1
        return float(self.unit_table(he)[tuple(he - 1 + d)])

    def unit_self_mass(self) -> float:
        """``C = int g (1 - T_0)``, the cell's total interaction with its complement."""
        if self._self_mass is None:
            self._self_mass = self._polar_self_mass() if self.scheme == "polar" else self._lattice_self_mass()
        return self._self_mass

    def _polar_self_mass(self):
        K, al = self.body, self.alpha
        cuts = np.concatenate([np.pi / 4 * np.arange(-4, 5), K.vertex_angles])
        cuts = np.unique(np.clip(cuts, -np.pi, np.pi))
        xg, wg = np.polynomial.legendre.leggauss(self.gauss_order)
        a, b = cuts[:-1], cuts[1:]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        th = mid[:, None] + half[:, None] * xg
        c, s = np.abs(np.cos(th)), np.abs(np.sin(th))
        rb = 1.0 / np.maximum(c, s)
        rad = (c + s) * rb ** (1 - al) / (1 - al) - c * s * rb ** (2 - al) / (2 - al) + rb ** (-al) / al
        g = self.gauge_power(np.stack([np.cos(th), np.sin(th)], axis=-1))
        return float(np.sum(half * np.sum(wg * g * rad, axis=1)))

    def _lattice_self_mass(self):
        M = self.self_radius
        table = self.unit_table((M + 1,) * self.dim)
        e = np.eye(self.dim)
        r0 = M / float(max(self.body.support(e[i]) for i in range(self.dim)))
        axes = [np.arange(-M, M + 1)] * self.dim
        d = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        inside = self.body.gauge(d) <= r0
        return float(table[inside].sum() + self.tail_integral(r0))

    # ------------------------------------------------------------------
    # physical spacing

    def weight_scale(self, h: float) -> float:
        return h ** (self.dim - self.alpha)

    def pair_weight(self, cell_a, cell_b, h: float = 1.0) -> float:
        """``int_A int_B ||x - y||_K^{-(n+alpha)}`` for two cells of side ``h``."""
        d = np.asarray(cell_b, dtype=int) - np.asarray(cell_a, dtype=int)
        return self.weight_scale(h) * self.unit_weight(d)

    def self_mass(self, h: float) -> float:
        return self.weight_scale(h) * self.unit_self_mass()

    def check_spacing(self, h: float) -> None:
        if self.trunc_radius is not None and self.trunc_radius < 3 * self.near_radius * h:
            raise KernelError("trunc_radius must be at least 3 * near_radius * h")

    def table(self, half_extent, h: float):
        """Physical weights ``h^(n-alpha) W`` with truncation applied."""
        self.check_spacing(h)
        t = self.weight_scale(h) * self.unit_table(half_extent)
        if self.trunc_radius is not None:
            t = np.where(self.offset_gauge(t.shape) * h > self.trunc_radius, 0.0, t)
        return t

    def offset_gauge(self, shape):
        axes = [np.arange(-(a // 2), a // 2 + 1) for a in shape]
        d = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        return self.body.gauge(d)

    def tail_integral(self, r: float) -> float:
        """``int_{||z||_K > r} ||z||_K^{-(n+alpha)} dz = (n/alpha) r^{-alpha} V(K)``."""
        if not r > 0:
            raise KernelError("tail radius must be positive")
        return self.dim / self.alpha * r ** (-self.alpha) * self.volume_K

    def cell_reach(self, h: float) -> float:
        """Largest ``||x - c||_K`` from a cell centre to a point of its cell."""
        corners = np.array(list(itertools.product((-0.5, 0.5), repeat=self.dim))) * 2.0
        return 0.5 * h * float(self.body.gauge(corners).max())

    def truncation_tail(self, h: float) -> float:
        """Bound on the weight one cell has with cells beyond ``R``."""
        if self.trunc_radius is None:
            return 0.0
        r = self.trunc_radius - 2 * self.cell_reach(h)
        if r <= 0:
            raise KernelError("trunc_radius too small for the grid spacing")
        return self.tail_integral(r) * h**self.dim


def tail_integral(model: KernelModel, r: float) -> float:
    return model.tail_integral(r)


def pair_weight(model: KernelModel, cell_a, cell_b, h: float = 1.0) -> float:
    return model.pair_weight(cell_a, cell_b, h)


def layer_cake_tail(model: KernelModel, r: float) -> float:
    """``V(K) int_r^inf (n+alpha) t^{-n-alpha-1} (t^n - r^n) dt`` by adaptive quadrature."""
    n, al = model.dim, model.alpha

    def f(t):
        return (n + al) * t ** (-n - al - 1) * (t**n - r**n)

    val, _ = integrate.quad(f, r, np.inf, epsabs=0, epsrel=1e-13, limit=200)
    return model.volume_K * val


def grid_codes(cells, half_extent):
    """Linear codes such that ``code(B) - code(A) + center`` indexes a table
    of shape ``2 * half_extent - 1`` at offset ``B - A``."""
    shape = tuple(2 * np.asarray(half_extent) - 1)
    strides = np.array([int(np.prod(shape[i + 1:])) for i in range(len(shape))], dtype=np.int64)
    center = int(np.dot(np.asarray(half_extent) - 1, strides))
    return np.asarray(cells, dtype=np.int64) @ strides, center


def set_gauge_diameter(K: ConvexBody, pts) -> float:
    """``max ||x - y||_K`` over a point cloud, through the facet form."""
    if len(pts) == 0:
        return 0.0
    proj = pts @ K.normals.T
    return float(np.max((proj.max(axis=0) - proj.min(axis=0)) / K.offsets))


__all__ = ["KernelModel", "KernelError", "tail_integral", "pair_weight", "layer_cake_tail",
           "grid_codes", "set_gauge_diameter", "GeometryError"]
