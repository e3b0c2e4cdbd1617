"""NumPy/SciPy implementations of the compiled kernels in ``_core.pyx``.

Each function matches the compiled signature and agrees with it to
rounding; only the max-flow differs in mechanism (SciPy's integer solver on
scaled capacities), the reported cut is recomputed in floating point by the
caller either way.
"""
from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_CHUNK = 512


def _wrap(x):
    return (x + np.pi) % (2.0 * np.pi) - np.pi


def radial(c, s, dx, dy, al):
    """Vectorized ``int_0^inf r^(-1-al) T_d(r c, r s) dr``."""
    c, s, dx, dy = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (c, s, dx, dy)))
    cand = []
    for k in (-1.0, 0.0, 1.0):
        with np.errstate(divide="ignore", invalid="ignore"):
            rx = np.where(c != 0.0, (dx + k) / np.where(c != 0.0, c, 1.0), 0.0)
            ry = np.where(s != 0.0, (dy + k) / np.where(s != 0.0, s, 1.0), 0.0)
        cand += [np.maximum(rx, 0.0), np.maximum(ry, 0.0)]
    br = np.sort(np.stack([np.zeros_like(c)] + cand, axis=-1), axis=-1)
    r0, r1 = br[..., :-1], br[..., 1:]
    cc, ss = c[..., None], s[..., None]
    ddx, ddy = dx[..., None], dy[..., None]
    rm = 0.5 * (r0 + r1)
    u = rm * cc - ddx
    v = rm * ss - ddy
    active = (r1 > r0) & (np.abs(u) < 1.0) & (np.abs(v) < 1.0)
    p1 = np.where(u >= 0, 1.0 + ddx, 1.0 - ddx)
    q1 = np.where(u >= 0, -cc, cc)
    p2 = np.where(v >= 0, 1.0 + ddy, 1.0 - ddy)
    q2 = np.where(v >= 0, -ss, ss)
    a0, a1, a2 = p1 * p2, p1 * q2 + q1 * p2, q1 * q2
    t = a1 * (r1 ** (1 - al) - r0 ** (1 - al)) / (1 - al)
    t += a2 * (r1 ** (2 - al) - r0 ** (2 - al)) / (2 - al)
    safe0 = np.where(r0 > 0, r0, 1.0)
    t += np.where(r0 > 0, a0 * (safe0 ** (-al) - np.where(r1 > 0, r1, 1.0) ** (-al)) / al, 0.0)
    return np.where(active, t, 0.0).sum(axis=-1)


def _facet_index(theta, vangles):
    m = len(vangles)
    idx = np.searchsorted(vangles, theta, side="right") - 1
    return np.where((idx < 0) | (idx >= m - 1), m - 1, idx)


def _weights_for(dx, dy, normals, offsets, vangles, alpha, xg, wg):
    phi = np.arctan2(dy, dx)
    nodes = []
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            if i == 0 and j == 0:
                continue
            x, y = dx + i, dy + j
            psi = _wrap(np.arctan2(y, x) - phi[:])
            # the origin is never a node: mark it so it drops out of lo/hi
            bad = (x == 0) & (y == 0)
            nodes.append(np.where(bad, np.nan, psi))
    # (0, 0) offset relative to d is d itself, always a node
    nodes.append(np.zeros_like(phi))
    nodes = np.stack(nodes, axis=1)
    lo, hi = np.nanmin(nodes, axis=1), np.nanmax(nodes, axis=1)
    nodes = np.where(np.isnan(nodes), lo[:, None], nodes)
    vpsi = _wrap(vangles[None, :] - phi[:, None])
    inside = (vpsi > lo[:, None]) & (vpsi < hi[:, None])
    keep = inside.any(axis=0)
    vpsi = np.where(inside[:, keep], vpsi[:, keep], lo[:, None])
    splits = np.sort(np.concatenate([nodes, vpsi], axis=1), axis=1)
    p0, p1 = splits[:, :-1], splits[:, 1:]
    mid, half = 0.5 * (p0 + p1), 0.5 * (p1 - p0)
    fac = _facet_index(_wrap(phi[:, None] + mid), vangles)
    a, b = normals[fac], offsets[fac]
    th = phi[:, None, None] + mid[..., None] + half[..., None] * xg
    c, s = np.cos(th), np.sin(th)
    g = (a[..., 0, None] * c + a[..., 1, None] * s) / b[..., None]
    with np.errstate(invalid="ignore", divide="ignore"):
        gp = np.where(half[..., None] > 0, np.abs(g) ** (-(2.0 + alpha)), 0.0)
    rad = radial(c, s, dx[:, None, None], dy[:, None, None], alpha)
    return np.sum(half * np.sum(wg * gp * rad, axis=-1), axis=1)


def weight_table_2d(normals, offsets, vangles, alpha, nx, ny, order=16):
    xg, wg = np.polynomial.legendre.leggauss(order)
    normals = np.asarray(normals, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    vangles = np.asarray(vangles, dtype=float)
    dxs, dys = np.meshgrid(np.arange(0, nx), np.arange(-(ny - 1), ny), indexing="ij")
    dxs, dys = dxs.ravel(), dys.ravel()
    keep = (dxs > 0) | (dys > 0)
    dxs, dys = dxs[keep].astype(float), dys[keep].astype(float)
    # near offsets see wide angular ranges; keep them in their own chunks
    near = np.maximum(np.abs(dxs), np.abs(dys)) <= 4
    order_idx = np.lexsort((np.arctan2(dys, dxs), ~near))
    vals = np.empty(len(dxs))
    for i0 in range(0, len(order_idx), _CHUNK):
        sel = order_idx[i0:i0 + _CHUNK]
        vals[sel] = _weights_for(dxs[sel], dys[sel], normals, offsets, vangles, alpha, xg, wg)
    out = np.zeros((2 * nx - 1, 2 * ny - 1))
    ix, iy = dxs.astype(int), dys.astype(int)
    out[ix + nx - 1, iy + ny - 1] = vals
    out[nx - 1 - ix, ny - 1 - iy] = vals
    return out


def cross_sum(codes_a, codes_b, table, center):
    codes_a = np.asarray(codes_a, dtype=np.int64)
    codes_b = np.asarray(codes_b, dtype=np.int64)
    out = np.zeros(len(codes_b))
    step = max(1, 4_000_000 // max(len(codes_a), 1))
    for j0 in range(0, len(codes_b), step):
        cb = codes_b[j0:j0 + step]
        out[j0:j0 + step] = table[cb[:, None] - codes_a[None, :] + center].sum(axis=1)
    return out


def absdiff_sum(codes, vals, table, center):
    codes = np.asarray(codes, dtype=np.int64)
    vals = np.asarray(vals, dtype=float)
    rows = np.zeros(len(codes))
    tot = 0.0
    step = max(1, 4_000_000 // max(len(codes), 1))
    for i0 in range(0, len(codes), step):
        ci = codes[i0:i0 + step]
        w = table[codes[None, :] - ci[:, None] + center]
        rows[i0:i0 + step] = w.sum(axis=1)
        tot += float((np.abs(vals[i0:i0 + step, None] - vals[None, :]) * w).sum())
    return tot, rows


def _dt1d(f):
    n = len(f)
    v = np.zeros(n, dtype=np.int64)
    z = np.empty(n + 1)
    k = 0
    z[0], z[1] = -np.inf, np.inf
    for q in range(1, n):
        s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k])
        while s <= z[k]:
            k -= 1
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k])
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = np.inf
    d = np.empty(n)
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        d[q] = (q - v[k]) ** 2 + f[v[k]]
    return d


def edt_sq(mask):
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return np.full(mask.shape, np.inf)
    f = np.where(mask, 0.0, 1e20)
    for ax in range(mask.ndim):
        f = np.apply_along_axis(_dt1d, ax, f)
    return f


def maxflow(indptr, heads, caps, rev, source, sink, tol, rounds=12):
    """Min cut through ``scipy.sparse.csgraph.maximum_flow``.

    SciPy's solver works in 32-bit integers, so capacities go through
    scaling rounds.  Each round floors the float residual at a resolution
    set by an upper bound on the remaining flow (the residual capacity of
    the previous round's cut), pushes an integer max flow, which is
    feasible for the true capacities, and subtracts it.  The cut is the
    reachability set of the last integer residual.
    """
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import breadth_first_order, maximum_flow

    indptr = np.asarray(indptr, dtype=np.int64)
    heads = np.asarray(heads, dtype=np.int64)
    caps = np.asarray(caps, dtype=float)
    n = len(indptr) - 1
    tails = np.repeat(np.arange(n), np.diff(indptr))
    resid = csr_matrix((caps, (tails, heads)), shape=(n, n))
    resid.sum_duplicates()
    limit = 2**31 - 1
    total = 0.0
    side = np.zeros(n, dtype=bool)
    side[source] = True
    bound = float(resid[source].sum())
    for _ in range(rounds):
        if bound <= max(tol, 1e-15 * total):
            break
        scale = 0.5 * limit / bound
        icap = resid.copy()
        icap.data = np.minimum(np.floor(icap.data * scale), limit)
        icap = icap.astype(np.int32)
        icap.eliminate_zeros()
        res = maximum_flow(icap, int(source), int(sink))
        iflow = res.flow.tocsr()
        ires = (icap.astype(np.int64) - iflow.astype(np.int64)).tocsr()
        ires.data = (ires.data > 0).astype(np.int8)
        ires.eliminate_zeros()
        side = np.zeros(n, dtype=bool)
        side[breadth_first_order(ires, int(source), directed=True, return_predecessors=False)] = True
        if res.flow_value > 0:
            resid = (resid - iflow.astype(float) / scale).tocsr()
            resid.data = np.maximum(resid.data, 0.0)
            total += res.flow_value / scale
        coo = resid.tocoo()
        crossing = side[coo.row] & ~side[coo.col]
        new_bound = float(coo.data[crossing].sum())
        if new_bound >= bound:
            break
        bound = new_bound
    return total, side
