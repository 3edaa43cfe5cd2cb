"""Hot inner loops for the star, multilevel and full-graph recursions.

Each kernel exists in two backends:

* ``NUMBA`` -- explicit loops compiled with ``numba.njit``;
* ``NUMPY`` -- the same loops run as plain Python where there is nothing to
  vectorize (single trajectories), and vectorized numpy where there is
  (batches, grids, graph steps).

``active`` is chosen at import time from :mod:`starsis._accel`; export
``STARSIS_DISABLE_NUMBA=1`` to force the numpy path. Both backends perform
the same floating-point operations in the same order, so they agree
bit-for-bit on everything except the grid maximum (``sqrt`` placement is
identical there too, but the reduction order differs).

Powers ``c**n`` are always sequential products. IEEE multiplication is
monotone in each argument, so this keeps the discrete maps componentwise
order-preserving in floating point, which the envelope checks rely on.
"""
from types import SimpleNamespace

import numpy as np

from . import _accel

SETTLED = 1
CAPPED = 0


def _make_loop_kernels(jit):
    """Build the loop kernels, compiled with ``jit`` (identity for plain Python)."""

    @jit
    def ipow(c, n):
        q = 1.0
        for _ in range(n):
            q *= c
        return q

    @jit
    def star_step(a, b, n, x, y):
        q = ipow(1.0 - b * y, n)
        return 1.0 - (1.0 - a * x) * q, 1.0 - (1.0 - a * y) * (1.0 - b * x)

    @jit
    def star_orbit(a, b, n, x0, y0, tx, ty, near, max_iters, tol, path):
        # Stops once a step and the following residual are both < tol and,
        # when near > 0, the point is within `near` of the origin or (tx, ty).
        # A zero-row `path` disables recording.
        record = path.shape[0] > 0
        x = x0
        y = y0
        if record:
            path[0, 0] = x
            path[0, 1] = y
        for k in range(max_iters):
            nx, ny = star_step(a, b, n, x, y)
            step = max(abs(nx - x), abs(ny - y))
            x = nx
            y = ny
            if record:
                path[k + 1, 0] = x
                path[k + 1, 1] = y
            if step < tol:
                fx, fy = star_step(a, b, n, x, y)
                if max(abs(fx - x), abs(fy - y)) < tol:
                    if near <= 0.0:
                        return x, y, k + 1, SETTLED
                    if max(abs(x), abs(y)) < near:
                        return x, y, k + 1, SETTLED
                    if max(abs(x - tx), abs(y - ty)) < near:
                        return x, y, k + 1, SETTLED
        return x, y, max_iters, CAPPED

    @jit
    def star_hit_time(a, b, n, x0, y0, tx, ty, tol, max_iters):
        x = x0
        y = y0
        for k in range(max_iters + 1):
            if max(abs(x - tx), abs(y - ty)) < tol:
                return k
            x, y = star_step(a, b, n, x, y)
        return -1

    @jit
    def star_settle_batch(a, b, n, x0, y0, tx, ty, near, max_iters, tol):
        m = a.shape[0]
        xs = np.empty(m)
        ys = np.empty(m)
        iters = np.empty(m, dtype=np.int64)
        status = np.empty(m, dtype=np.int64)
        dummy = np.empty((0, 2))
        for i in range(m):
            x, y, k, s = star_orbit(a[i], b[i], n[i], x0[i], y0[i], tx[i], ty[i],
                                    near, max_iters, tol, dummy)
            xs[i] = x
            ys[i] = y
            iters[i] = k
            status[i] = s
        return xs, ys, iters, status

    @jit
    def level_step(a, b, counts, s, out):
        L = s.shape[0]
        for k in range(L):
            keep = 1.0 - a * s[k]
            if k > 0:
                keep *= 1.0 - b * s[k - 1]
            if k < L - 1:
                keep *= ipow(1.0 - b * s[k + 1], counts[k])
            out[k] = 1.0 - keep
        return out

    @jit
    def level_orbit(a, b, counts, s0, max_iters, tol, path):
        record = path.shape[0] > 0
        cur = s0.copy()
        nxt = np.empty_like(cur)
        if record:
            path[0, :] = cur
        for k in range(max_iters):
            level_step(a, b, counts, cur, nxt)
            step = 0.0
            for j in range(cur.shape[0]):
                d = abs(nxt[j] - cur[j])
                if d > step:
                    step = d
            cur, nxt = nxt, cur
            if record:
                path[k + 1, :] = cur
            if step < tol:
                return cur, k + 1, SETTLED
        return cur, max_iters, CAPPED

    @jit
    def full_step(indptr, indices, a, b, p, implicit):
        # explicit: 1 - (1 - a p_i) prod(1 - b p_j)
        # implicit (cure term at time t solved out):
        #   (1 - (1 - p_i) zeta) / (1 + (1 - a) zeta)
        m = p.shape[0]
        out = np.empty(m)
        for i in range(m):
            zeta = 1.0
            for e in range(indptr[i], indptr[i + 1]):
                zeta *= 1.0 - b * p[indices[e]]
            if implicit:
                out[i] = (1.0 - (1.0 - p[i]) * zeta) / (1.0 + (1.0 - a) * zeta)
            else:
                out[i] = 1.0 - (1.0 - a * p[i]) * zeta
        return out

    @jit
    def mvt_lambda1_max(a, b, n, grid):
        # max over (x, y, t1, t2) in grid^4 of the larger eigenvalue of
        # [[a al, n b be], [b ga, a de]], plus the worst excess over
        # 1 - (1 - max(al, de)) a.
        g = grid.shape[0]
        best = -np.inf
        bi = 0
        bj = 0
        bk = 0
        bl = 0
        excess = -np.inf
        for i in range(g):
            x = grid[i]
            for j in range(g):
                y = grid[j]
                for k in range(g):
                    t1 = grid[k]
                    c1 = 1.0 - b * t1 * y
                    qm1 = ipow(c1, n - 1)
                    al = qm1 * c1
                    be = (1.0 - a * t1 * x) * qm1
                    for l in range(g):
                        t2 = grid[l]
                        ga = 1.0 - a * t2 * y
                        de = 1.0 - b * t2 * x
                        diff = a * (al - de)
                        lam = 0.5 * (a * (al + de)
                                     + np.sqrt(diff * diff + 4.0 * n * b * b * be * ga))
                        if lam > best:
                            best = lam
                            bi = i
                            bj = j
                            bk = k
                            bl = l
                        ex = lam - (1.0 - (1.0 - max(al, de)) * a)
                        if ex > excess:
                            excess = ex
        return best, bi, bj, bk, bl, excess

    return dict(
        ipow=ipow,
        star_step=star_step,
        star_orbit=star_orbit,
        star_hit_time=star_hit_time,
        star_settle_batch=star_settle_batch,
        level_step=level_step,
        level_orbit=level_orbit,
        full_step=full_step,
        mvt_lambda1_max=mvt_lambda1_max,
    )


# -- vectorized numpy versions -------------------------------------------------

def _ipow_vec(c, n):
    q = np.ones_like(c)
    n = np.asarray(n)
    for k in range(int(n.max(initial=0))):
        q = np.where(k < n, q * c, q)
    return q


def _star_step_vec(a, b, n, x, y):
    q = _ipow_vec(1.0 - b * y, n)
    return 1.0 - (1.0 - a * x) * q, 1.0 - (1.0 - a * y) * (1.0 - b * x)


def _star_settle_batch_np(a, b, n, x0, y0, tx, ty, near, max_iters, tol):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = np.asarray(n, dtype=np.int64)
    x = np.array(x0, dtype=float)
    y = np.array(y0, dtype=float)
    tx = np.asarray(tx, dtype=float)
    ty = np.asarray(ty, dtype=float)
    m = a.shape[0]
    iters = np.full(m, max_iters, dtype=np.int64)
    status = np.full(m, CAPPED, dtype=np.int64)
    live = np.arange(m)
    for k in range(max_iters):
        if live.size == 0:
            break
        al, bl, nl = a[live], b[live], n[live]
        xl, yl = x[live], y[live]
        nx, ny = _star_step_vec(al, bl, nl, xl, yl)
        step = np.maximum(np.abs(nx - xl), np.abs(ny - yl))
        x[live] = nx
        y[live] = ny
        cand = step < tol
        if not cand.any():
            continue
        fx, fy = _star_step_vec(al[cand], bl[cand], nl[cand], nx[cand], ny[cand])
        ok = np.maximum(np.abs(fx - nx[cand]), np.abs(fy - ny[cand])) < tol
        if near > 0.0:
            idx = live[cand]
            close0 = np.maximum(np.abs(nx[cand]), np.abs(ny[cand])) < near
            closet = np.maximum(np.abs(nx[cand] - tx[idx]), np.abs(ny[cand] - ty[idx])) < near
            ok &= close0 | closet
        done = np.zeros(live.size, dtype=bool)
        done[np.flatnonzero(cand)[ok]] = True
        iters[live[done]] = k + 1
        status[live[done]] = SETTLED
        live = live[~done]
    return x, y, iters, status


def _full_step_np(indptr, indices, a, b, p, implicit):
    p = np.asarray(p, dtype=float)
    factors = 1.0 - b * p[indices]
    deg = np.diff(indptr)
    zeta = np.ones(p.shape[0])
    has = deg > 0
    if factors.size:
        # reduceat misbehaves on empty segments; those keep zeta = 1
        zeta[has] = np.multiply.reduceat(factors, indptr[:-1][has])
    if implicit:
        return (1.0 - (1.0 - p) * zeta) / (1.0 + (1.0 - a) * zeta)
    return 1.0 - (1.0 - a * p) * zeta


def _mvt_lambda1_max_np(a, b, n, grid):
    x, y, t1, t2 = np.meshgrid(grid, grid, grid, grid, indexing="ij")
    c1 = 1.0 - b * t1 * y
    qm1 = _ipow_vec(c1, np.full(c1.shape, n - 1))
    al = qm1 * c1
    be = (1.0 - a * t1 * x) * qm1
    ga = 1.0 - a * t2 * y
    de = 1.0 - b * t2 * x
    diff = a * (al - de)
    lam = 0.5 * (a * (al + de) + np.sqrt(diff * diff + 4.0 * n * b * b * be * ga))
    flat = int(np.argmax(lam))
    i, j, k, l = np.unravel_index(flat, lam.shape)
    excess = lam - (1.0 - (1.0 - np.maximum(al, de)) * a)
    return float(lam.flat[flat]), int(i), int(j), int(k), int(l), float(excess.max())


_py = _make_loop_kernels(_accel.identity)

NUMPY = SimpleNamespace(
    name="numpy",
    star_step=_py["star_step"],
    star_orbit=_py["star_orbit"],
    star_hit_time=_py["star_hit_time"],
    star_settle_batch=_star_settle_batch_np,
    # a handful of levels is too few to vectorize over; plain loops win
    level_step=_py["level_step"],
    level_orbit=_py["level_orbit"],
    full_step=_full_step_np,
    mvt_lambda1_max=_mvt_lambda1_max_np,
)

if _accel.HAVE_NUMBA:
    _nb = _make_loop_kernels(_accel.njit)
    NUMBA = SimpleNamespace(
        name="numba",
        star_step=_nb["star_step"],
        star_orbit=_nb["star_orbit"],
        star_hit_time=_nb["star_hit_time"],
        star_settle_batch=_nb["star_settle_batch"],
        level_step=_nb["level_step"],
        level_orbit=_nb["level_orbit"],
        full_step=_nb["full_step"],
        mvt_lambda1_max=_nb["mvt_lambda1_max"],
    )
else:  # pragma: no cover
    NUMBA = None

active = NUMBA if _accel.USE_NUMBA else NUMPY


def backend(name=None):
    """Return a kernel namespace by name (``"numba"``/``"numpy"``), or the active one."""
    if name is None:
        return active
    if name == "numpy":
        return NUMPY
    if name == "numba":
        if NUMBA is None:
            raise RuntimeError("numba is not installed")
        return NUMBA
    raise ValueError(f"unknown backend {name!r}")
