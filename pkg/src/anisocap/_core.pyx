# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: planar pair-weight tables, pair sums, distance
transform and a floating-point max-flow.  ``_fallback.py`` mirrors every
function here with the same signature."""
import numpy as np
cimport numpy as cnp
from libc.math cimport atan2, cos, sin, pow, fabs, M_PI
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND_NAME = "compiled"


cdef inline double _wrap(double x) noexcept nogil:
    while x > M_PI:
        x -= 2.0 * M_PI
    while x <= -M_PI:
        x += 2.0 * M_PI
    return x


cdef inline void _isort(double* a, int n) noexcept nogil:
    cdef int i, j
    cdef double key
    for i in range(1, n):
        key = a[i]
        j = i - 1
        while j >= 0 and a[j] > key:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = key


cdef double _radial(double c, double s, double dx, double dy, double al) noexcept nogil:
    # int_0^inf r^(-1-al) T_d(r c, r s) dr with T_d the product tent centred at d
    cdef double br[7]
    cdef int nb = 1, k, i
    cdef double r, r0, r1, rm, u, v, p1, q1, p2, q2, a0, a1, a2, tot = 0.0
    br[0] = 0.0
    for k in range(-1, 2):
        if c != 0.0:
            r = (dx + k) / c
            if r > 0.0:
                br[nb] = r
                nb += 1
        if s != 0.0:
            r = (dy + k) / s
            if r > 0.0:
                br[nb] = r
                nb += 1
    _isort(br, nb)
    for i in range(nb - 1):
        r0 = br[i]
        r1 = br[i + 1]
        if r1 <= r0:
            continue
        rm = 0.5 * (r0 + r1)
        u = rm * c - dx
        v = rm * s - dy
        if fabs(u) >= 1.0 or fabs(v) >= 1.0:
            continue
        if u >= 0.0:
            p1 = 1.0 + dx
            q1 = -c
        else:
            p1 = 1.0 - dx
            q1 = c
        if v >= 0.0:
            p2 = 1.0 + dy
            q2 = -s
        else:
            p2 = 1.0 - dy
            q2 = s
        a0 = p1 * p2
        a1 = p1 * q2 + q1 * p2
        a2 = q1 * q2
        tot += a1 * (pow(r1, 1.0 - al) - pow(r0, 1.0 - al)) / (1.0 - al)
        tot += a2 * (pow(r1, 2.0 - al) - pow(r0, 2.0 - al)) / (2.0 - al)
        if r0 > 0.0:
            tot += a0 * (pow(r0, -al) - pow(r1, -al)) / al
    return tot


cdef inline int _facet(double theta, const double* vang, int m) noexcept nogil:
    # vertex angles ascending; facet j joins vertex j and j+1
    cdef int lo = 0, hi = m - 1, mid
    if theta < vang[0] or theta >= vang[m - 1]:
        return m - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if vang[mid] <= theta:
            lo = mid
        else:
            hi = mid
    return lo


cdef double _pair_weight(double dx, double dy, const double* nx_, const double* ny_,
                         const double* off, const double* vang, int m, double al,
                         const double* xg, const double* wg, int order, double* buf) noexcept nogil:
    cdef double phi = atan2(dy, dx)
    cdef double lo = 1e300, hi = -1e300, psi, x, y, p0, p1, mid, half, th, c, s, g
    cdef double tot = 0.0, part
    cdef int i, j, n = 0, q, f
    for i in range(-1, 2):
        for j in range(-1, 2):
            x = dx + i
            y = dy + j
            if x == 0.0 and y == 0.0:
                continue
            psi = _wrap(atan2(y, x) - phi)
            buf[n] = psi
            n += 1
            if psi < lo:
                lo = psi
            if psi > hi:
                hi = psi
    for i in range(m):
        psi = _wrap(vang[i] - phi)
        if psi > lo and psi < hi:
            buf[n] = psi
            n += 1
    _isort(buf, n)
    for i in range(n - 1):
        p0 = buf[i]
        p1 = buf[i + 1]
        if p1 <= p0:
            continue
        mid = 0.5 * (p0 + p1)
        half = 0.5 * (p1 - p0)
        f = _facet(_wrap(phi + mid), vang, m)
        part = 0.0
        for q in range(order):
            th = phi + mid + half * xg[q]
            c = cos(th)
            s = sin(th)
            g = (nx_[f] * c + ny_[f] * s) / off[f]
            part += wg[q] * pow(g, -(2.0 + al)) * _radial(c, s, dx, dy, al)
        tot += half * part
    return tot


def weight_table_2d(double[:, ::1] normals, double[::1] offsets, double[::1] vangles,
                    double alpha, int nx, int ny, int order=16):
    """Exact unit-spacing pair weights for offsets |dx| < nx, |dy| < ny."""
    xg_np, wg_np = np.polynomial.legendre.leggauss(order)
    cdef double[::1] xg = np.ascontiguousarray(xg_np)
    cdef double[::1] wg = np.ascontiguousarray(wg_np)
    cdef int m = offsets.shape[0]
    cdef double[::1] nxs = np.ascontiguousarray(normals[:, 0])
    cdef double[::1] nys = np.ascontiguousarray(normals[:, 1])
    out_np = np.zeros((2 * nx - 1, 2 * ny - 1))
    cdef double[:, ::1] out = out_np
    cdef double* buf = <double*> malloc((m + 16) * sizeof(double))
    cdef int dx, dy
    cdef double w
    try:
        with nogil:
            for dx in range(0, nx):
                for dy in range(-(ny - 1), ny):
                    if dx == 0 and dy <= 0:
                        continue
                    w = _pair_weight(dx, dy, &nxs[0], &nys[0], &offsets[0], &vangles[0], m,
                                     alpha, &xg[0], &wg[0], order, buf)
                    out[dx + nx - 1, dy + ny - 1] = w
                    out[nx - 1 - dx, ny - 1 - dy] = w
    finally:
        free(buf)
    return out_np


def cross_sum(cnp.int64_t[::1] codes_a, cnp.int64_t[::1] codes_b, double[::1] table, cnp.int64_t center):
    """out[j] = sum_i table[codes_b[j] - codes_a[i] + center]."""
    cdef Py_ssize_t na = codes_a.shape[0], nb = codes_b.shape[0], i, j
    out_np = np.zeros(nb)
    cdef double[::1] out = out_np
    cdef double acc
    cdef cnp.int64_t cb
    with nogil:
        for j in range(nb):
            acc = 0.0
            cb = codes_b[j] + center
            for i in range(na):
                acc += table[cb - codes_a[i]]
            out[j] = acc
    return out_np


def absdiff_sum(cnp.int64_t[::1] codes, double[::1] vals, double[::1] table, cnp.int64_t center):
    """Ordered-pair sum of |f_A - f_B| W(B - A) and per-cell weight row sums."""
    cdef Py_ssize_t n = codes.shape[0], i, j
    rows_np = np.zeros(n)
    cdef double[::1] rows = rows_np
    cdef double tot = 0.0, w, part
    with nogil:
        for i in range(n):
            part = 0.0
            for j in range(n):
                if i == j:
                    continue
                w = table[codes[j] - codes[i] + center]
                rows[i] += w
                part += fabs(vals[i] - vals[j]) * w
            tot += part
    return tot, rows_np


cdef void _dt1d(double* f, double* d, int n, int* v, double* z) noexcept nogil:
    cdef int k = 0, q
    cdef double s
    v[0] = 0
    z[0] = -1e300
    z[1] = 1e300
    for q in range(1, n):
        s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k])
        while s <= z[k]:
            k -= 1
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k])
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = 1e300
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        d[q] = (q - v[k]) * (q - v[k]) + f[v[k]]


def _edt_rows(double[:, ::1] rows):
    cdef Py_ssize_t r, nr = rows.shape[0]
    cdef int n = rows.shape[1], q
    out_np = np.empty_like(np.asarray(rows))
    cdef double[:, ::1] out = out_np
    cdef int* v = <int*> malloc(n * sizeof(int))
    cdef double* z = <double*> malloc((n + 1) * sizeof(double))
    try:
        with nogil:
            for r in range(nr):
                _dt1d(&rows[r, 0], &out[r, 0], n, v, z)
    finally:
        free(v)
        free(z)
    return out_np


def edt_sq(mask):
    """Squared Euclidean distance (cell units) from every cell centre to the
    nearest true cell centre; ``inf`` everywhere when the mask is empty."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return np.full(mask.shape, np.inf)
    f = np.where(mask, 0.0, 1e20)
    for ax in range(mask.ndim):
        # wraparound is off module-wide, so no negative indices here
        last = mask.ndim - 1
        moved = np.ascontiguousarray(np.moveaxis(f, ax, last))
        shp = moved.shape
        res = _edt_rows(moved.reshape(-1, shp[last]))
        f = np.moveaxis(res.reshape(shp), last, ax)
    return np.ascontiguousarray(f)


def maxflow(cnp.int64_t[::1] indptr, cnp.int64_t[::1] heads, double[::1] caps_in,
            cnp.int64_t[::1] rev, Py_ssize_t source, Py_ssize_t sink, double tol):
    """Dinic on a CSR arc list where arc ``rev[e]`` reverses arc ``e``.

    Returns the flow value and a boolean source-side mask of a minimum cut.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    caps_np = np.array(caps_in, dtype=np.float64, copy=True)
    cdef double[::1] cap = caps_np
    level_np = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] level = level_np
    it_np = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] it = it_np
    queue_np = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] queue = queue_np
    stack_np = np.empty(n + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] stack = stack_np
    cdef Py_ssize_t qh, qt, u, e, w, depth, k
    cdef double flow = 0.0, push
    with nogil:
        while True:
            for u in range(n):
                level[u] = -1
            level[source] = 0
            qh = 0
            qt = 0
            queue[qt] = source
            qt += 1
            while qh < qt:
                u = queue[qh]
                qh += 1
                for e in range(indptr[u], indptr[u + 1]):
                    w = heads[e]
                    if level[w] < 0 and cap[e] > tol:
                        level[w] = level[u] + 1
                        queue[qt] = w
                        qt += 1
            if level[sink] < 0:
                break
            for u in range(n):
                it[u] = indptr[u]
            # iterative blocking-flow search; stack holds arc ids along the path
            depth = 0
            u = source
            while True:
                if u == sink:
                    push = 1e300
                    for k in range(depth):
                        if cap[stack[k]] < push:
                            push = cap[stack[k]]
                    for k in range(depth):
                        cap[stack[k]] -= push
                        cap[rev[stack[k]]] += push
                    flow += push
                    # restart from the tail of the first saturated arc
                    for k in range(depth):
                        if cap[stack[k]] <= tol:
                            depth = k
                            break
                    if depth == 0:
                        u = source
                    else:
                        u = heads[stack[depth - 1]]
                    continue
                while it[u] < indptr[u + 1]:
                    e = it[u]
                    w = heads[e]
                    if cap[e] > tol and level[w] == level[u] + 1:
                        break
                    it[u] += 1
                if it[u] < indptr[u + 1]:
                    stack[depth] = it[u]
                    depth += 1
                    u = heads[it[u]]
                else:
                    if u == source:
                        break
                    level[u] = -1
                    depth -= 1
                    e = stack[depth]
                    u = heads[rev[e]]
                    it[u] += 1
        # source side of the cut: reachable in the residual graph
        for u in range(n):
            level[u] = 0
        level[source] = 1
        qh = 0
        qt = 0
        queue[qt] = source
        qt += 1
        while qh < qt:
            u = queue[qh]
            qh += 1
            for e in range(indptr[u], indptr[u + 1]):
                w = heads[e]
                if level[w] == 0 and cap[e] > tol:
                    level[w] = 1
                    queue[qt] = w
                    qt += 1
    return flow, level_np.astype(bool)
