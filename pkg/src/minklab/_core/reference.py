"""Pure-Python backend for the closed-orbit search kernel.

This module is the behavioural reference: the compiled backend
(``minklab._core._speedups``) is a direct translation and must follow the
same operation order so the two stay interchangeable.

The kernel minimizes, over closed m-gons with vertices on the boundary of a
planar body K (angle-parameterized, vertex j at u(theta_j)/g_K(u(theta_j))),

    F(theta) = sum_j h_T(q_{j+1} - q_j) + mu * max(0, 1 - phi)

where phi = min_t max_j g_K(q_j + t) measures whether the polygon can be
translated into the interior of K (phi < 1) or not (phi = 1, the admissible
closed-orbit regime).  For two-gons phi has the closed form g_{K-K}(q_1 - q_0)
supplied by the caller as a third evaluator; otherwise an inner warm-started
simplex solve computes it.  mu is an exact-penalty weight; the caller picks it
above the orbit-length scale.
"""

import math

import numpy as np

QUAD, PNORM, MAXDOT, CALLABLE = 0, 1, 2, 3


def compile_eval(enc):
    """Turn an evaluator encoding (kind, mat, p, c, fn) into f(x0, x1)."""
    kind = enc[0]
    if kind == QUAD:
        m = np.asarray(enc[1], dtype=float)
        c = float(enc[3])
        m00, m01, m10, m11 = float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1])

        def ev(x0, x1):
            q = x0 * (m00 * x0 + m01 * x1) + x1 * (m10 * x0 + m11 * x1)
            return c * math.sqrt(q) if q > 0.0 else 0.0

        return ev
    if kind == PNORM:
        p = float(enc[2])
        c = float(enc[3])
        invp = 1.0 / p

        def ev(x0, x1):
            a0 = abs(x0)
            a1 = abs(x1)
            m_ = a0 if a0 > a1 else a1
            if m_ == 0.0:
                return 0.0
            return c * m_ * ((a0 / m_) ** p + (a1 / m_) ** p) ** invp

        return ev
    if kind == MAXDOT:
        rows = [(float(r[0]), float(r[1])) for r in np.asarray(enc[1], dtype=float)]

        def ev(x0, x1):
            best = -1e300
            for r0, r1 in rows:
                v = r0 * x0 + r1 * x1
                if v > best:
                    best = v
            return best

        return ev
    if kind == CALLABLE:
        fn = enc[4]

        def ev(x0, x1):
            return float(fn(np.array([x0, x1])))

        return ev
    raise ValueError(f"unknown evaluator kind {kind}")


def nelder_mead(f, x0, step, tol, maxiter):
    """Downhill simplex with standard coefficients; returns (x, fx, converged, nev)."""
    d = len(x0)
    simplex = [list(x0)]
    for i in range(d):
        x = list(x0)
        x[i] += step
        simplex.append(x)
    fv = [f(x) for x in simplex]
    nev = d + 1
    converged = False
    it = 0
    while it < maxiter:
        order = sorted(range(d + 1), key=lambda i: fv[i])
        simplex = [simplex[i] for i in order]
        fv = [fv[i] for i in order]
        if fv[d] - fv[0] <= tol * (1.0 + abs(fv[0])):
            converged = True
            break
        cen = [0.0] * d
        for i in range(d):
            xi = simplex[i]
            for k in range(d):
                cen[k] += xi[k]
        for k in range(d):
            cen[k] /= d
        worst = simplex[d]
        xr = [cen[k] + (cen[k] - worst[k]) for k in range(d)]
        fr = f(xr)
        nev += 1
        if fr < fv[0]:
            xe = [cen[k] + 2.0 * (cen[k] - worst[k]) for k in range(d)]
            fe = f(xe)
            nev += 1
            if fe < fr:
                simplex[d], fv[d] = xe, fe
            else:
                simplex[d], fv[d] = xr, fr
        elif fr < fv[d - 1]:
            simplex[d], fv[d] = xr, fr
        elif fr < fv[d]:
            xc = [cen[k] + 0.5 * (cen[k] - worst[k]) for k in range(d)]
            fc = f(xc)
            nev += 1
            if fc <= fr:
                simplex[d], fv[d] = xc, fc
            else:
                nev += _shrink(simplex, fv, f)
        else:
            xc = [cen[k] - 0.5 * (cen[k] - worst[k]) for k in range(d)]
            fc = f(xc)
            nev += 1
            if fc < fv[d]:
                simplex[d], fv[d] = xc, fc
            else:
                nev += _shrink(simplex, fv, f)
        it += 1
    order = sorted(range(d + 1), key=lambda i: fv[i])
    return list(simplex[order[0]]), fv[order[0]], converged, nev


def _shrink(simplex, fv, f):
    best = simplex[0]
    d = len(best)
    for i in range(1, d + 1):
        for k in range(d):
            simplex[i][k] = best[k] + 0.5 * (simplex[i][k] - best[k])
        fv[i] = f(simplex[i])
    return d


class _State:
    __slots__ = ("gk", "ht", "gd", "m", "mu", "warm_t", "warm")

    def __init__(self, gk, ht, gd, m, mu):
        self.gk = gk
        self.ht = ht
        self.gd = gd
        self.m = m
        self.mu = mu
        self.warm_t = [0.0, 0.0]
        self.warm = False


def _points(state, thetas):
    gk = state.gk
    qs = []
    for t in thetas:
        u0 = math.cos(t)
        u1 = math.sin(t)
        g = gk(u0, u1)
        qs.append((u0 / g, u1 / g))
    return qs


def _length(state, qs):
    ht = state.ht
    m = state.m
    total = 0.0
    for j in range(m):
        a = qs[j]
        b = qs[(j + 1) % m]
        total += ht(b[0] - a[0], b[1] - a[1])
    return total


def _phi_inner(state, qs, precise):
    gk = state.gk
    scale = 0.0
    for q in qs:
        scale += math.hypot(q[0], q[1])
    scale /= len(qs)

    def psi(t):
        t0, t1 = t[0], t[1]
        best = -1e300
        for q0, q1 in qs:
            v = gk(q0 + t0, q1 + t1)
            if v > best:
                best = v
        return best

    if precise:
        t = list(state.warm_t)
        val = psi(t)
        for step in (0.3 * scale, 0.03 * scale, 0.003 * scale):
            t, val, _, _ = nelder_mead(psi, t, step, 1e-12, 400)
        return val
    step = 0.3 * scale if not state.warm else 0.05 * scale
    t, val, _, _ = nelder_mead(psi, state.warm_t, step, 1e-9, 140)
    state.warm_t = t
    state.warm = True
    return val


def _phi(state, qs, precise):
    if state.m == 2 and state.gd is not None:
        return state.gd(qs[0][0] - qs[1][0], qs[0][1] - qs[1][1])
    return _phi_inner(state, qs, precise)


def _objective(state, thetas):
    qs = _points(state, thetas)
    val = _length(state, qs)
    pen = 1.0 - _phi(state, qs, False)
    if pen > 0.0:
        val += state.mu * pen
    return val


def polygon_search_2d(gk_enc, ht_enc, gd_enc, m, theta0, mu, tol, maxiter):
    """One penalized simplex descent over closed m-gons on a planar body.

    Returns (length, phi, thetas, converged, nev, min_gap): the penalty-free
    h_T-length of the final polygon, its tightly re-evaluated admissibility
    value, the final angles, whether any descent stage met the tolerance, the
    objective evaluation count, and the smallest consecutive vertex distance.
    """
    gk = compile_eval(gk_enc)
    ht = compile_eval(ht_enc)
    gd = compile_eval(gd_enc) if gd_enc is not None else None
    state = _State(gk, ht, gd, int(m), float(mu))

    def f(th):
        return _objective(state, th)

    x = list(map(float, theta0))
    converged = False
    nev = 0
    for step in (0.35, 0.02, 0.002):
        x, fx, conv, n = nelder_mead(f, x, step, tol, maxiter)
        converged = converged or conv
        nev += n

    qs = _points(state, x)
    length = _length(state, qs)
    phi = _phi(state, qs, True) if (state.m > 2 or gd is None) else _phi(state, qs, False)
    min_gap = 1e300
    for j in range(state.m):
        a = qs[j]
        b = qs[(j + 1) % state.m]
        gap = math.hypot(b[0] - a[0], b[1] - a[1])
        if gap < min_gap:
            min_gap = gap
    return length, phi, x, converged, nev, min_gap
