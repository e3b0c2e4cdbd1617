"""Convex geometry of origin-symmetric bodies.

Bodies are given by a symmetric vertex list; the halfspace form
``{x : <a_i, x> <= b_i}`` with unit normals ``a_i`` and offsets ``b_i > 0``
is derived from it.  In the plane the derivation is an angular sort, in
three dimensions it goes through ``scipy.spatial.ConvexHull``.

The module also evaluates the moment body ``Z1 K`` through its support
function ``(n+1)/2 * int_K |<u, y>| dy`` and anisotropic perimeters of
polygons with respect to any object exposing ``support(u)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PRUNE_TOL = 1e-12
MC_DEFAULT_SAMPLES = 200_000


class GeometryError(ValueError):
    """Raised for invalid bodies, polygons, or degenerate inputs."""


@dataclass(frozen=True)
class MCEstimate:
    value: float
    stderr: float
    samples: int


def _as_direction(u, dim):
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != dim:
        raise GeometryError(f"expected {dim}-dimensional input, got shape {u.shape}")
    if np.any(np.linalg.norm(np.atleast_2d(u), axis=-1) == 0.0):
        raise GeometryError("degenerate direction")
    return u


def _hull_2d(vertices):
    """Angularly sorted vertices with collinear and duplicate points pruned."""
    ang = np.arctan2(vertices[:, 1], vertices[:, 0])
    order = np.lexsort((np.linalg.norm(vertices, axis=1), ang))
    pts = vertices[order]
    scale = np.abs(pts).max()
    keep = []
    for p in pts:
        if keep and np.linalg.norm(p - keep[-1]) <= PRUNE_TOL * scale:
            continue
        keep.append(p)
    pts = np.array(keep)
    # drop vertices that are not strict corners
    changed = True
    while changed and len(pts) > 3:
        changed = False
        m = len(pts)
        for i in range(m):
            a, b, c = pts[i - 1], pts[i], pts[(i + 1) % m]
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if cross <= PRUNE_TOL * scale * scale:
                pts = np.delete(pts, i, axis=0)
                changed = True
                break
    return pts


def _facets_2d(verts):
    nxt = np.roll(verts, -1, axis=0)
    edge = nxt - verts
    normals = np.column_stack([edge[:, 1], -edge[:, 0]])
    normals /= np.linalg.norm(normals, axis=1)[:, None]
    offsets = np.einsum("ij,ij->i", normals, verts)
    return normals, offsets


def _facets_nd(verts):
    from scipy.spatial import ConvexHull

    hull = ConvexHull(verts)
    normals, offsets, groups = [], [], []
    for eq, simplex in zip(hull.equations, hull.simplices):
        a, b = eq[:-1], -eq[-1]
        for k, (a2, b2) in enumerate(zip(normals, offsets)):
            if np.allclose(a, a2, atol=1e-9) and abs(b - b2) <= 1e-9 * max(1.0, abs(b)):
                groups[k].update(simplex.tolist())
                break
        else:
            normals.append(a)
            offsets.append(b)
            groups.append(set(simplex.tolist()))
    used = sorted(set().union(*groups))
    return np.array(normals), np.array(offsets), verts[used], [verts[sorted(g)] for g in groups]


class ConvexBody:
    """Origin-symmetric convex polytope.

    Parameters
    ----------
    vertices : array_like, shape (m, n)
        Vertex list, closed under negation.
    label : str
        Identifier used in reports.
    """

    def __init__(self, vertices, label: str = "body"):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] < 2:
            raise GeometryError("vertices must be an (m, n) array with n >= 2")
        self.dim = v.shape[1]
        self.label = label
        scale = np.abs(v).max()
        for p in v:
            if np.min(np.linalg.norm(v + p, axis=1)) > 1e-9 * scale:
                raise GeometryError(f"vertex list is not symmetric: -{p.tolist()} missing")
        if self.dim == 2:
            self.vertices = _hull_2d(v)
            self.normals, self.offsets = _facets_2d(self.vertices)
            self._facet_points = None
        else:
            self.normals, self.offsets, self.vertices, self._facet_points = _facets_nd(v)
        if len(self.vertices) < self.dim + 1 or np.any(self.offsets <= 0):
            raise GeometryError("origin is not interior to the body")

    def __repr__(self):
        return f"ConvexBody({self.label!r}, dim={self.dim}, vertices={len(self.vertices)})"

    # identity used for weight-table caching
    @property
    def key(self):
        return (self.dim, self.vertices.round(15).tobytes())

    @property
    def vertex_angles(self):
        """Polar angles of the (counter-clockwise sorted) planar vertices."""
        if self.dim != 2:
            raise GeometryError("vertex angles exist for planar bodies only")
        return np.arctan2(self.vertices[:, 1], self.vertices[:, 0])

    def support(self, u):
        u = _as_direction(u, self.dim)
        return np.max(u @ self.vertices.T, axis=-1)

    def gauge(self, x):
        x = np.asarray(x, dtype=float)
        return np.maximum(np.max((x @ self.normals.T) / self.offsets, axis=-1), 0.0)

    def polar(self) -> "ConvexBody":
        return ConvexBody(self.normals / self.offsets[:, None], label=f"polar({self.label})")

    def scaled(self, r: float) -> "ConvexBody":
        if r <= 0:
            raise GeometryError("scale factor must be positive")
        return ConvexBody(self.vertices * r, label=f"{r:g}*{self.label}")

    def contains(self, x, tol=1e-12):
        return self.gauge(x) <= 1.0 + tol

    def volume(self, mc_samples: int | None = None, seed: int = 0) -> float:
        """Exact area in the plane; Monte Carlo estimate otherwise."""
        if self.dim == 2:
            x, y = self.vertices[:, 0], self.vertices[:, 1]
            return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
        return self.volume_estimate(mc_samples, seed).value

    def volume_estimate(self, mc_samples: int | None = None, seed: int = 0) -> MCEstimate:
        if self.dim == 2:
            return MCEstimate(self.volume(), 0.0, 0)
        n = MC_DEFAULT_SAMPLES if mc_samples is None else int(mc_samples)
        if n <= 0:
            raise GeometryError("sampler required")
        rng = np.random.default_rng(seed)
        lo, hi = self.vertices.min(axis=0), self.vertices.max(axis=0)
        box = float(np.prod(hi - lo))
        hits = self.contains(rng.uniform(lo, hi, size=(n, self.dim))).astype(float)
        return MCEstimate(box * hits.mean(), box * hits.std(ddof=1) / math.sqrt(n), n)

    def facet_areas(self):
        """(n-1)-volumes of the facets, aligned with ``normals``."""
        if self.dim == 2:
            return np.linalg.norm(np.roll(self.vertices, -1, axis=0) - self.vertices, axis=1)
        if self.dim != 3:
            raise GeometryError("facet areas implemented for n <= 3")
        return np.array([_facet_area_3d(a, pts) for a, pts in zip(self.normals, self._facet_points)])

    def to_dict(self):
        return {"dim": self.dim, "vertices": self.vertices.tolist(), "label": self.label}

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - {"dim", "vertices", "label"}
        if unknown:
            raise GeometryError(f"unknown body keys: {sorted(unknown)}")
        body = cls(d["vertices"], label=d.get("label", "body"))
        if "dim" in d and d["dim"] != body.dim:
            raise GeometryError(f"declared dim {d['dim']} does not match vertices")
        return body


def _facet_area_3d(normal, pts):
    c = pts.mean(axis=0)
    e1 = pts[0] - c
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    uv = np.column_stack([(pts - c) @ e1, (pts - c) @ e2])
    order = np.argsort(np.arctan2(uv[:, 1], uv[:, 0]))
    x, y = uv[order, 0], uv[order, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


# ----------------------------------------------------------------------
# functional interface

def support_function(K, u):
    """``h_K(u)``; works for any object exposing ``support``."""
    return K.support(u)


def minkowski_gauge(K: ConvexBody, x):
    return K.gauge(x)


def polar_body(K: ConvexBody) -> ConvexBody:
    return K.polar()


def body_volume(K: ConvexBody, mc_samples: int | None = None, seed: int = 0) -> float:
    return K.volume(mc_samples, seed)


# ----------------------------------------------------------------------
# stock bodies

def regular_polygon(m: int, radius: float = 1.0, label: str | None = None) -> ConvexBody:
    if m < 4 or m % 2:
        raise GeometryError("a symmetric regular polygon needs an even vertex count >= 4")
    t = 2.0 * np.pi * np.arange(m) / m
    v = radius * np.column_stack([np.cos(t), np.sin(t)])
    # exact negation so the symmetry check is not fooled by rounding
    v[m // 2:] = -v[: m // 2]
    return ConvexBody(v, label=label or f"{m}-gon")


def _stock_square():
    return ConvexBody([[1, 1], [-1, 1], [-1, -1], [1, -1]], label="square")


def _stock_diamond():
    return ConvexBody([[1, 0], [0, 1], [-1, 0], [0, -1]], label="diamond")


def _stock_hexagon():
    return regular_polygon(6, label="hexagon")


def _stock_disk():
    return regular_polygon(256, label="disk256")


def _stock_cube():
    v = np.array(np.meshgrid([-1, 1], [-1, 1], [-1, 1], indexing="ij")).reshape(3, -1).T
    return ConvexBody(v, label="cube")


def _stock_octahedron():
    e = np.eye(3)
    return ConvexBody(np.vstack([e, -e]), label="octahedron")


STOCK_BODIES = {
    "square": _stock_square,
    "diamond": _stock_diamond,
    "hexagon": _stock_hexagon,
    "disk256": _stock_disk,
    "cube": _stock_cube,
    "octahedron": _stock_octahedron,
}
PLANAR_STOCK = ("square", "diamond", "hexagon", "disk256")


def stock_body(name: str) -> ConvexBody:
    try:
        return STOCK_BODIES[name]()
    except KeyError:
        raise GeometryError(f"unknown stock body {name!r}; choose from {sorted(STOCK_BODIES)}") from None


def load_body(spec) -> ConvexBody:
    """Stock name, path to a JSON body file, or an already built body."""
    if isinstance(spec, ConvexBody):
        return spec
    if isinstance(spec, dict):
        return ConvexBody.from_dict(spec)
    if str(spec) in STOCK_BODIES:
        return stock_body(str(spec))
    path = Path(spec)
    if not path.exists():
        raise GeometryError(f"{spec!r} is neither a stock body nor a readable file")
    return ConvexBody.from_dict(json.loads(path.read_text()))


def save_body(K: ConvexBody, path) -> None:
    Path(path).write_text(json.dumps(K.to_dict(), indent=2, sort_keys=True) + "\n")


# ----------------------------------------------------------------------
# moment body

def _abs_linear_triangle(area, pa, pb):
    """Integral of ``|L|`` over a triangle with ``L`` linear, zero at one vertex."""
    if pa * pb >= 0:
        return area * abs(pa + pb) / 3.0
    return area * (pa * pa + pb * pb) / (3.0 * (abs(pa) + abs(pb)))


def moment_support_2d(K: ConvexBody, u) -> float:
    u = _as_direction(u, 2)
    v = K.vertices
    w = np.roll(v, -1, axis=0)
    areas = 0.5 * (v[:, 0] * w[:, 1] - v[:, 1] * w[:, 0])
    pa, pb = v @ u, w @ u
    total = sum(_abs_linear_triangle(a, x, y) for a, x, y in zip(areas, pa, pb))
    return 1.5 * total


def moment_support_mc(K: ConvexBody, u, samples: int = MC_DEFAULT_SAMPLES, seed: int = 0) -> MCEstimate:
    u = _as_direction(u, K.dim)
    if samples <= 0:
        raise GeometryError("sampler required")
    rng = np.random.default_rng(seed)
    lo, hi = K.vertices.min(axis=0), K.vertices.max(axis=0)
    box = float(np.prod(hi - lo))
    y = rng.uniform(lo, hi, size=(samples, K.dim))
    vals = np.where(K.contains(y), np.abs(y @ u), 0.0) * box * (K.dim + 1) / 2
    return MCEstimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples)), samples)


def moment_body_support(K: ConvexBody, u, samples: int = MC_DEFAULT_SAMPLES, seed: int = 0) -> float:
    """``h_{Z1 K}(u)``: exact in the plane, Monte Carlo in higher dimension."""
    if K.dim == 2:
        return moment_support_2d(K, u)
    return moment_support_mc(K, u, samples, seed).value


class MomentBody:
    """The moment body ``Z1 K`` known through its support function.

    Parameters
    ----------
    base : ConvexBody
    n_dirs : int
        Angular resolution used for the gauge and the volume (planar only).
    samples, seed : int
        Monte Carlo controls for ``dim >= 3``.
    """

    def __init__(self, base: ConvexBody, n_dirs: int = 4096, samples: int = MC_DEFAULT_SAMPLES, seed: int = 0):
        self.base = base
        self.dim = base.dim
        self.label = f"Z1({base.label})"
        self.n_dirs = int(n_dirs)
        self.samples = samples
        self.seed = seed
        self._dirs = None
        self._h = None

    def __repr__(self):
        return f"MomentBody({self.base.label!r})"

    def support(self, u):
        u = np.asarray(u, dtype=float)
        if u.ndim == 1:
            return moment_body_support(self.base, u, self.samples, self.seed)
        return np.array([moment_body_support(self.base, x, self.samples, self.seed) for x in u])

    def support_estimate(self, u) -> MCEstimate:
        if self.dim == 2:
            return MCEstimate(moment_support_2d(self.base, u), 0.0, 0)
        return moment_support_mc(self.base, u, self.samples, self.seed)

    def _table(self):
        if self.dim != 2:
            raise GeometryError("angular tables are planar only")
        if self._dirs is None:
            # h is even, so half the circle suffices
            t = np.pi * np.arange(self.n_dirs // 2) / (self.n_dirs // 2)
            self._dirs = np.column_stack([np.cos(t), np.sin(t)])
            self._h = np.array([moment_support_2d(self.base, d) for d in self._dirs])
        return self._dirs, self._h

    def gauge(self, x):
        """``||x||_{Z1 K} = max_u <x,u> / h(u)``, from the tabulated support."""
        dirs, h = self._table()
        scalar = np.ndim(x) == 1
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty(len(x))
        for i0 in range(0, len(x), 512):
            r = (x[i0:i0 + 512] @ dirs.T) / h
            out[i0:i0 + 512] = np.abs(r).max(axis=1)
        return float(out[0]) if scalar else out

    def polar_support(self, u):
        """Support function of ``Z1* K`` (the gauge of ``Z1 K``)."""
        return self.gauge(u)

    def polar(self):
        return _SupportView(self.polar_support, self.dim, f"Z1*({self.base.label})")

    def volume(self) -> float:
        """``V(Z1 K) = (1/2) int rho^2`` with ``rho = 1 / gauge`` on the circle."""
        t = 2.0 * np.pi * np.arange(self.n_dirs) / self.n_dirs
        theta = np.column_stack([np.cos(t), np.sin(t)])
        rho = 1.0 / self.gauge(theta)
        return float(0.5 * np.mean(rho**2) * 2.0 * np.pi)


class _SupportView:
    def __init__(self, fn, dim, label):
        self.support = fn
        self.dim = dim
        self.label = label


# ----------------------------------------------------------------------
# polygons and anisotropic perimeter

def _segments_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        return np.sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    # collinear overlap counts as an intersection
    def on_seg(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    return any(o == 0 and on_seg(*s, c) for o, s, c in (
        (o1, (p1, p2), q1), (o2, (p1, p2), q2), (o3, (q1, q2), p1), (o4, (q1, q2), p2)))


class Polygon:
    """Simple planar polygon, stored counter-clockwise."""

    def __init__(self, vertices, label: str = "polygon"):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise GeometryError("polygon needs at least three planar vertices")
        self.label = label
        if self._signed_area(v) < 0:
            v = v[::-1].copy()
        self.vertices = v
        if not self.is_simple():
            raise GeometryError("polygon is not simple")

    @staticmethod
    def _signed_area(v):
        x, y = v[:, 0], v[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    def __repr__(self):
        return f"Polygon({self.label!r}, {len(self.vertices)} vertices)"

    def is_simple(self) -> bool:
        v = self.vertices
        m = len(v)
        if abs(self._signed_area(v)) == 0.0:
            return False
        for i in range(m):
            for j in range(i + 1, m):
                if j == i + 1 or (i == 0 and j == m - 1):
                    continue
                if _segments_cross(v[i], v[(i + 1) % m], v[j], v[(j + 1) % m]):
                    return False
        return True

    def is_convex(self) -> bool:
        v = self.vertices
        a, b, c = v, np.roll(v, -1, axis=0), np.roll(v, -2, axis=0)
        cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
        return bool(np.all(cross >= -1e-12 * np.abs(v).max() ** 2))

    @property
    def area(self) -> float:
        return self._signed_area(self.vertices)

    def edges(self):
        """Edge lengths and outward unit normals."""
        e = np.roll(self.vertices, -1, axis=0) - self.vertices
        lengths = np.linalg.norm(e, axis=1)
        normals = np.column_stack([e[:, 1], -e[:, 0]]) / lengths[:, None]
        return lengths, normals

    def contains(self, pts):
        """Even-odd test, vectorized over points."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        x, y = pts[:, 0], pts[:, 1]
        inside = np.zeros(len(pts), dtype=bool)
        v = self.vertices
        for (x0, y0), (x1, y1) in zip(v, np.roll(v, -1, axis=0)):
            if y0 == y1:
                continue
            hit = (y0 > y) != (y1 > y)
            xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            inside ^= hit & (x < xc)
        return inside

    def scaled(self, s: float) -> "Polygon":
        return Polygon(self.vertices * s, label=f"{s:g}*{self.label}")

    def to_dict(self):
        return {"vertices": self.vertices.tolist(), "label": self.label}

    @classmethod
    def from_body(cls, K: ConvexBody) -> "Polygon":
        if K.dim != 2:
            raise GeometryError("only planar bodies convert to polygons")
        return cls(K.vertices, label=K.label)


def anisotropic_perimeter(E, F) -> float:
    """``P(E, F) = sum_facets |facet| * h_F(normal)``.

    ``E`` is a :class:`Polygon` or a three-dimensional :class:`ConvexBody`;
    ``F`` is anything with a ``support`` method (``ConvexBody``,
    :class:`MomentBody`, or its polar view).
    """
    if isinstance(E, Polygon):
        lengths, normals = E.edges()
    elif isinstance(E, ConvexBody):
        lengths, normals = E.facet_areas(), E.normals
    else:
        raise GeometryError("E must be a Polygon or a ConvexBody")
    h = np.array([float(F.support(nu)) for nu in normals])
    return float(np.dot(lengths, h))


def tau_n(n: int) -> float:
    """``int_{S^{n-1}} |cos theta| d sigma`` = 2 |B^{n-1}|."""
    if n < 1:
        raise GeometryError("dimension must be positive")
    return 2.0 * math.pi ** ((n - 1) / 2) / math.gamma((n + 1) / 2)
