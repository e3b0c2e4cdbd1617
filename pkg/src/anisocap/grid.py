"""Sets, functions and measures sampled on a uniform cell grid.

Every set and function keeps its outer layer of cells empty, so that it is
bounded away from the edge of the computational box.  Distances are
Euclidean between cell centres, computed by an exact separable transform.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _backend
from .geometry import ConvexBody, Polygon


class GridError(ValueError):
    """Raised when a grid object would violate its invariants."""


@dataclass(frozen=True)
class Grid:
    dim: int
    extent: tuple
    spacing: float
    origin: tuple

    def __post_init__(self):
        ext = tuple(int(e) for e in np.broadcast_to(self.extent, (self.dim,)))
        org = tuple(float(o) for o in np.broadcast_to(self.origin, (self.dim,)))
        object.__setattr__(self, "extent", ext)
        object.__setattr__(self, "origin", org)
        object.__setattr__(self, "spacing", float(self.spacing))
        if self.dim < 1:
            raise GridError("dimension must be positive")
        if not self.spacing > 0:
            raise GridError("spacing must be positive")
        if min(ext) < 2:
            raise GridError("extent must be at least 2 per axis")

    @classmethod
    def covering(cls, dim: int = 2, extent: int = 128, half_width: float = 2.0) -> "Grid":
        """Grid of ``extent**dim`` cells on the box ``[-half_width, half_width]^dim``."""
        return cls(dim, (extent,) * dim, 2.0 * half_width / extent, (-half_width,) * dim)

    @property
    def shape(self):
        return self.extent

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    def centers(self):
        axes = [self.origin[i] + (np.arange(self.extent[i]) + 0.5) * self.spacing for i in range(self.dim)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def interior(self, pad: int = 1):
        """Mask of cells at least ``pad`` layers away from the boundary."""
        m = np.zeros(self.extent, dtype=bool)
        m[tuple(slice(pad, e - pad) for e in self.extent)] = True
        return m

    def to_dict(self):
        return {"dim": self.dim, "extent": list(self.extent), "spacing": self.spacing, "origin": list(self.origin)}


def _outer_layer_clear(a) -> bool:
    for ax in range(a.ndim):
        if np.take(a, 0, axis=ax).any() or np.take(a, -1, axis=ax).any():
            return False
    return True


def rle_encode(mask) -> list:
    """Run lengths of the flattened mask, starting with a run of ``False``."""
    flat = np.asarray(mask, dtype=bool).ravel()
    change = np.flatnonzero(np.diff(flat.astype(np.int8))) + 1
    bounds = np.concatenate([[0], change, [flat.size]])
    runs = np.diff(bounds).tolist()
    if flat.size and flat[0]:
        runs = [0] + runs
    return runs


def rle_decode(runs, shape):
    vals = np.zeros(len(runs), dtype=bool)
    vals[1::2] = True
    flat = np.repeat(vals, runs)
    if flat.size != int(np.prod(shape)):
        raise GridError("run lengths do not match the grid extent")
    return flat.reshape(shape)


class GridSet:
    """Union of grid cells; ``polygon`` optionally records the exact shape."""

    def __init__(self, grid: Grid, mask, label: str = "set", polygon: Polygon | None = None):
        mask = np.array(mask, dtype=bool)
        if mask.shape != grid.extent:
            raise GridError(f"mask shape {mask.shape} does not match grid extent {grid.extent}")
        if not _outer_layer_clear(mask):
            raise GridError("set touches the outer layer of the grid; pad the domain")
        self.grid = grid
        self.mask = mask
        self.mask.flags.writeable = False
        self.label = label
        self.polygon = polygon

    def __repr__(self):
        return f"GridSet({self.label!r}, cells={self.count}, h={self.grid.spacing:g})"

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    @property
    def volume(self) -> float:
        return self.grid.cell_volume * self.count

    @property
    def empty(self) -> bool:
        return not self.mask.any()

    def cells(self):
        return np.argwhere(self.mask)

    def centers(self):
        return self.grid.centers()[self.mask]

    def issubset(self, other: "GridSet") -> bool:
        _same_grid(self, other)
        return bool(np.all(other.mask[self.mask]))

    def union(self, other: "GridSet", label=None) -> "GridSet":
        _same_grid(self, other)
        return GridSet(self.grid, self.mask | other.mask, label or f"{self.label}+{other.label}")

    def shifted(self, k) -> "GridSet":
        """Translate by whole cells; the grid is unchanged."""
        return GridSet(self.grid, np.roll(self.mask, k, axis=tuple(range(self.grid.dim))), f"{self.label}>>{k}")

    def with_grid_extent(self, extent, offset=None) -> "GridSet":
        """Embed into a larger grid with the same spacing (centred by default)."""
        extent = tuple(np.broadcast_to(extent, (self.grid.dim,)).tolist())
        if offset is None:
            offset = [(e - o) // 2 for e, o in zip(extent, self.grid.extent)]
        new = np.zeros(extent, dtype=bool)
        new[tuple(slice(o, o + e) for o, e in zip(offset, self.grid.extent))] = self.mask
        origin = tuple(o - k * self.grid.spacing for o, k in zip(self.grid.origin, offset))
        return GridSet(Grid(self.grid.dim, extent, self.grid.spacing, origin), new, self.label, self.polygon)

    def to_dict(self):
        d = self.grid.to_dict()
        d["mask_rle"] = rle_encode(self.mask)
        d["label"] = self.label
        if self.polygon is not None:
            d["polygon"] = self.polygon.vertices.tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        allowed = {"dim", "extent", "spacing", "origin", "mask_rle", "label", "polygon"}
        unknown = set(d) - allowed
        if unknown:
            raise GridError(f"unknown set keys: {sorted(unknown)}")
        grid = Grid(int(d["dim"]), tuple(d["extent"]), float(d["spacing"]), tuple(d["origin"]))
        poly = Polygon(d["polygon"]) if d.get("polygon") is not None else None
        return cls(grid, rle_decode(d["mask_rle"], grid.extent), d.get("label", "set"), poly)


def _same_grid(a, b):
    if a.grid != b.grid:
        raise GridError("objects live on different grids")


class GridFunction:
    """Cell-wise values with support away from the outer layer."""

    def __init__(self, grid: Grid, values, label: str = "f"):
        values = np.array(values, dtype=float)
        if values.shape != grid.extent:
            raise GridError(f"value shape {values.shape} does not match grid extent {grid.extent}")
        if not np.all(np.isfinite(values)):
            raise GridError("values must be finite")
        if not _outer_layer_clear(values != 0):
            raise GridError("function support touches the outer layer of the grid; pad the domain")
        self.grid = grid
        self.values = values
        self.values.flags.writeable = False
        self.label = label

    def __repr__(self):
        return f"GridFunction({self.label!r}, levels={len(self.levels())})"

    def support(self) -> GridSet:
        return GridSet(self.grid, self.values != 0, f"supp({self.label})")

    def levels(self):
        """Sorted distinct positive values of ``|f|``."""
        v = np.unique(np.abs(self.values))
        return v[v > 0]

    def level_set(self, t: float) -> GridSet:
        return level_set(self, t)

    def scaled(self, c: float) -> "GridFunction":
        return GridFunction(self.grid, c * self.values, f"{c:g}*{self.label}")

    def to_dict(self):
        d = self.grid.to_dict()
        d["mask_rle"] = rle_encode(self.values != 0)
        d["values"] = self.values.ravel().tolist()
        d["label"] = self.label
        return d

    @classmethod
    def from_dict(cls, d):
        allowed = {"dim", "extent", "spacing", "origin", "mask_rle", "values", "label"}
        unknown = set(d) - allowed
        if unknown:
            raise GridError(f"unknown function keys: {sorted(unknown)}")
        grid = Grid(int(d["dim"]), tuple(d["extent"]), float(d["spacing"]), tuple(d["origin"]))
        return cls(grid, np.asarray(d["values"], dtype=float).reshape(grid.extent), d.get("label", "f"))


class GridMeasure:
    """Absolutely continuous measure with a nonnegative cell density."""

    def __init__(self, grid: Grid, density, name: str = "mu"):
        density = np.array(np.broadcast_to(density, grid.extent), dtype=float)
        if np.any(density < 0) or not np.all(np.isfinite(density)):
            raise GridError("density must be finite and nonnegative")
        self.grid = grid
        self.density = density
        self.name = name

    @classmethod
    def lebesgue(cls, grid: Grid) -> "GridMeasure":
        return cls(grid, 1.0, "lebesgue")

    @property
    def bound(self) -> float:
        """The density bound ``M``."""
        return float(self.density.max())

    def __call__(self, E: GridSet) -> float:
        if E.grid != self.grid:
            raise GridError("measure and set live on different grids")
        return self.grid.cell_volume * float(self.density[E.mask].sum())

    def __repr__(self):
        return f"GridMeasure({self.name!r}, M={self.bound:g})"


# ----------------------------------------------------------------------
# operations

def level_set(f: GridFunction, t: float) -> GridSet:
    """``O_t(f) = {|f| > t}``."""
    if t < 0:
        raise GridError("level must be nonnegative")
    return GridSet(f.grid, np.abs(f.values) > t, f"{{|{f.label}|>{t:g}}}")


def distance_to(E: GridSet):
    """Euclidean distance (length units) from each cell centre to the set."""
    return np.sqrt(_backend.edt_sq(E.mask)) * E.grid.spacing


def set_dilate(E: GridSet, r: float) -> GridSet:
    """Cells whose centre lies within distance ``r`` of a centre of ``E``."""
    if r < 0:
        raise GridError("dilation radius must be nonnegative")
    if r == 0 or E.empty:
        return E
    d = distance_to(E)
    mask = d <= r * (1 + 1e-12)
    if not _outer_layer_clear(mask):
        raise GridError("dilation escapes the grid; pad the domain")
    return GridSet(E.grid, mask, f"{E.label}(+{r:g})")


def set_volume(E: GridSet) -> float:
    return E.volume


def mollified_indicator(O: GridSet, eps: float) -> GridFunction:
    """``f_eps = max(0, 1 - dist(., O) / eps)``, equal to 1 on ``O``."""
    h = O.grid.spacing
    if eps < h * (1 - 1e-12):
        raise GridError("eps must be at least one grid spacing")
    d = distance_to(O)
    vals = np.clip(1.0 - d / eps, 0.0, 1.0)
    if not _outer_layer_clear(vals > 0):
        raise GridError("mollifier support escapes the grid; pad the domain")
    return GridFunction(O.grid, vals, f"f_{eps:g}({O.label})")


def scale_set(E: GridSet, s: int) -> GridSet:
    """The set ``sE`` at unchanged spacing: each cell becomes an ``s^n`` block."""
    s = int(s)
    if s < 1:
        raise GridError("scale factor must be a positive integer")
    mask = E.mask
    for ax in range(E.grid.dim):
        mask = np.repeat(mask, s, axis=ax)
    g = E.grid
    # keep the physical scaling centred on the origin
    grid = Grid(g.dim, tuple(e * s for e in g.extent), g.spacing, tuple(o * s for o in g.origin))
    poly = E.polygon.scaled(s) if E.polygon is not None else None
    return GridSet(grid, mask, f"{s}*{E.label}", poly)


# ----------------------------------------------------------------------
# generators

def ball(grid: Grid, K: ConvexBody, radius: float = 1.0, center=None, label=None) -> GridSet:
    c = np.zeros(grid.dim) if center is None else np.asarray(center, dtype=float)
    mask = K.gauge(grid.centers() - c) <= radius * (1 + 1e-12)
    poly = None
    if grid.dim == 2 and center is None:
        poly = Polygon(K.vertices * radius, label=f"{radius:g}*{K.label}")
    return GridSet(grid, mask, label or f"ball_{K.label}", poly)


def box(grid: Grid, lo, hi, label="box") -> GridSet:
    lo, hi = np.broadcast_to(lo, (grid.dim,)), np.broadcast_to(hi, (grid.dim,))
    x = grid.centers()
    mask = np.all((x >= lo) & (x <= hi), axis=-1)
    poly = None
    if grid.dim == 2:
        poly = Polygon([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]], label=label)
    return GridSet(grid, mask, label, poly)


def polygon_set(grid: Grid, poly: Polygon, label=None) -> GridSet:
    if grid.dim != 2:
        raise GridError("polygon rasterization is planar")
    mask = poly.contains(grid.centers().reshape(-1, 2)).reshape(grid.extent)
    return GridSet(grid, mask, label or poly.label, poly)


def union(*sets, label="union") -> GridSet:
    if not sets:
        raise GridError("union of nothing")
    mask = np.zeros(sets[0].grid.extent, dtype=bool)
    for s in sets:
        _same_grid(sets[0], s)
        mask |= s.mask
    return GridSet(sets[0].grid, mask, label)


def tent(grid: Grid, radius: float = 1.0, center=None, body: ConvexBody | None = None,
         levels: int | None = None, height: float = 1.0, label=None) -> GridFunction:
    """``height * max(0, 1 - ||x - c|| / radius)``; sup-norm unless ``body`` is given.

    With ``levels`` the profile is rounded up to that many equal steps.
    """
    c = np.zeros(grid.dim) if center is None else np.asarray(center, dtype=float)
    x = grid.centers() - c
    r = np.abs(x).max(axis=-1) if body is None else body.gauge(x)
    v = np.clip(1.0 - r / radius, 0.0, 1.0)
    if levels:
        v = np.ceil(v * levels - 1e-9) / levels
    return GridFunction(grid, height * v, label or ("tent" if not levels else f"tent{levels}"))


def indicator(E: GridSet, c: float = 1.0) -> GridFunction:
    return GridFunction(E.grid, c * E.mask.astype(float), f"{c:g}*1[{E.label}]")


# ----------------------------------------------------------------------
# files

def load_set(path) -> GridSet:
    return GridSet.from_dict(json.loads(Path(path).read_text()))


def load_function(path) -> GridFunction:
    return GridFunction.from_dict(json.loads(Path(path).read_text()))


def save(obj, path) -> None:
    Path(path).write_text(json.dumps(obj.to_dict(), sort_keys=True) + "\n")


def padded_extent(width_cells: int, pad_fraction: float = 0.25) -> int:
    """Extent leaving at least ``pad_fraction`` of padding on each side."""
    return int(math.ceil(width_cells * (1 + 2 * pad_fraction)))
