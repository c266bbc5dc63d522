# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled closed-orbit search kernel.

Direct translation of minklab._core.reference; the two must implement the
same descent (coefficients, ordering, termination) so results agree to
rounding.  See reference.py for the algorithm description.
"""

from libc.math cimport cos, sin, sqrt, fabs, hypot, pow

import numpy as np

QUAD, PNORM, MAXDOT, CALLABLE = 0, 1, 2, 3

cdef enum:
    MAXD = 16


cdef class _Eval:
    cdef int kind
    cdef double m00, m01, m10, m11
    cdef double p, invp, c
    cdef double[:, ::1] rows
    cdef int nrows
    cdef object fn

    def __init__(self, enc):
        cdef object mat
        self.kind = enc[0]
        mat = enc[1]
        self.fn = None
        self.nrows = 0
        if self.kind == QUAD:
            m = np.ascontiguousarray(mat, dtype=np.float64)
            self.m00 = m[0, 0]
            self.m01 = m[0, 1]
            self.m10 = m[1, 0]
            self.m11 = m[1, 1]
            self.c = enc[3]
        elif self.kind == PNORM:
            self.p = enc[2]
            self.invp = 1.0 / self.p
            self.c = enc[3]
        elif self.kind == MAXDOT:
            self.rows = np.ascontiguousarray(mat, dtype=np.float64)
            self.nrows = self.rows.shape[0]
        elif self.kind == CALLABLE:
            self.fn = enc[4]
        else:
            raise ValueError(f"unknown evaluator kind {enc[0]}")

    cdef double ev(self, double x0, double x1) except? -1.0:
        cdef double q, a0, a1, m_, best, v
        cdef int i
        if self.kind == QUAD:
            q = x0 * (self.m00 * x0 + self.m01 * x1) + x1 * (self.m10 * x0 + self.m11 * x1)
            return self.c * sqrt(q) if q > 0.0 else 0.0
        if self.kind == PNORM:
            a0 = fabs(x0)
            a1 = fabs(x1)
            m_ = a0 if a0 > a1 else a1
            if m_ == 0.0:
                return 0.0
            return self.c * m_ * pow(pow(a0 / m_, self.p) + pow(a1 / m_, self.p), self.invp)
        if self.kind == MAXDOT:
            best = -1e300
            for i in range(self.nrows):
                v = self.rows[i, 0] * x0 + self.rows[i, 1] * x1
                if v > best:
                    best = v
            return best
        return float(self.fn(np.array([x0, x1])))


cdef class _Search:
    cdef _Eval gk, ht, gd
    cdef int m
    cdef double mu
    cdef double warm_t0, warm_t1
    cdef bint warm
    cdef double qx[MAXD]
    cdef double qy[MAXD]
    cdef long nev

    cdef int set_points(self, double* thetas) except -1:
        cdef int j
        cdef double u0, u1, g
        for j in range(self.m):
            u0 = cos(thetas[j])
            u1 = sin(thetas[j])
            g = self.gk.ev(u0, u1)
            self.qx[j] = u0 / g
            self.qy[j] = u1 / g
        return 0

    cdef double length(self) except? -1.0:
        cdef double total = 0.0
        cdef int j, k
        for j in range(self.m):
            k = (j + 1) % self.m
            total += self.ht.ev(self.qx[k] - self.qx[j], self.qy[k] - self.qy[j])
        return total

    cdef double psi(self, double t0, double t1) except? -1.0:
        cdef double best = -1e300
        cdef double v
        cdef int j
        for j in range(self.m):
            v = self.gk.ev(self.qx[j] + t0, self.qy[j] + t1)
            if v > best:
                best = v
        return best

    cdef double phi_inner(self, bint precise) except? -1.0:
        cdef double scale = 0.0
        cdef int j
        cdef double t[2]
        cdef double tout[2]
        cdef double val, step
        cdef bint conv
        for j in range(self.m):
            scale += hypot(self.qx[j], self.qy[j])
        scale /= self.m
        t[0] = self.warm_t0
        t[1] = self.warm_t1
        if precise:
            val = self.psi(t[0], t[1])
            step = 0.3 * scale
            self._nm_inner(t, step, 1e-12, 400, tout, &val, &conv)
            t[0] = tout[0]; t[1] = tout[1]
            step = 0.03 * scale
            self._nm_inner(t, step, 1e-12, 400, tout, &val, &conv)
            t[0] = tout[0]; t[1] = tout[1]
            step = 0.003 * scale
            self._nm_inner(t, step, 1e-12, 400, tout, &val, &conv)
            return val
        step = 0.3 * scale if not self.warm else 0.05 * scale
        self._nm_inner(t, step, 1e-9, 140, tout, &val, &conv)
        self.warm_t0 = tout[0]
        self.warm_t1 = tout[1]
        self.warm = True
        return val

    cdef double phi(self, bint precise) except? -1.0:
        if self.m == 2 and self.gd is not None:
            return self.gd.ev(self.qx[0] - self.qx[1], self.qy[0] - self.qy[1])
        return self.phi_inner(precise)

    cdef double objective(self, double* thetas) except? -1.0:
        cdef double val, pen
        self.set_points(thetas)
        val = self.length()
        pen = 1.0 - self.phi(False)
        if pen > 0.0:
            val += self.mu * pen
        self.nev += 1
        return val

    # downhill simplex over t in R^2, objective psi; same scheme as _nm_outer
    cdef int _nm_inner(self, double* x0, double step, double tol, int maxiter,
                       double* xbest, double* fbest, bint* conv) except -1:
        cdef double S[3][2]
        cdef double fv[3]
        cdef double tmp[2]
        cdef double cen[2]
        cdef double xr[2]
        cdef double xe[2]
        cdef double xc[2]
        cdef double fr, fe, fc, key
        cdef int d = 2, i, k, j, it
        for k in range(d):
            S[0][k] = x0[k]
        for i in range(d):
            for k in range(d):
                S[i + 1][k] = x0[k]
            S[i + 1][i] += step
        for i in range(d + 1):
            fv[i] = self.psi(S[i][0], S[i][1])
        conv[0] = False
        it = 0
        while it < maxiter:
            # stable insertion sort by value
            for i in range(1, d + 1):
                for k in range(d):
                    tmp[k] = S[i][k]
                key = fv[i]
                j = i - 1
                while j >= 0 and fv[j] > key:
                    for k in range(d):
                        S[j + 1][k] = S[j][k]
                    fv[j + 1] = fv[j]
                    j -= 1
                for k in range(d):
                    S[j + 1][k] = tmp[k]
                fv[j + 1] = key
            if fv[d] - fv[0] <= tol * (1.0 + fabs(fv[0])):
                conv[0] = True
                break
            for k in range(d):
                cen[k] = 0.0
            for i in range(d):
                for k in range(d):
                    cen[k] += S[i][k]
            for k in range(d):
                cen[k] /= d
            for k in range(d):
                xr[k] = cen[k] + (cen[k] - S[d][k])
            fr = self.psi(xr[0], xr[1])
            if fr < fv[0]:
                for k in range(d):
                    xe[k] = cen[k] + 2.0 * (cen[k] - S[d][k])
                fe = self.psi(xe[0], xe[1])
                if fe < fr:
                    for k in range(d):
                        S[d][k] = xe[k]
                    fv[d] = fe
                else:
                    for k in range(d):
                        S[d][k] = xr[k]
                    fv[d] = fr
            elif fr < fv[d - 1]:
                for k in range(d):
                    S[d][k] = xr[k]
                fv[d] = fr
            elif fr < fv[d]:
                for k in range(d):
                    xc[k] = cen[k] + 0.5 * (cen[k] - S[d][k])
                fc = self.psi(xc[0], xc[1])
                if fc <= fr:
                    for k in range(d):
                        S[d][k] = xc[k]
                    fv[d] = fc
                else:
                    for i in range(1, d + 1):
                        for k in range(d):
                            S[i][k] = S[0][k] + 0.5 * (S[i][k] - S[0][k])
                        fv[i] = self.psi(S[i][0], S[i][1])
            else:
                for k in range(d):
                    xc[k] = cen[k] - 0.5 * (cen[k] - S[d][k])
                fc = self.psi(xc[0], xc[1])
                if fc < fv[d]:
                    for k in range(d):
                        S[d][k] = xc[k]
                    fv[d] = fc
                else:
                    for i in range(1, d + 1):
                        for k in range(d):
                            S[i][k] = S[0][k] + 0.5 * (S[i][k] - S[0][k])
                        fv[i] = self.psi(S[i][0], S[i][1])
            it += 1
        j = 0
        for i in range(1, d + 1):
            if fv[i] < fv[j]:
                j = i
        for k in range(d):
            xbest[k] = S[j][k]
        fbest[0] = fv[j]
        return 0

    # downhill simplex over theta in R^m, objective self.objective
    cdef int _nm_outer(self, double* x0, int d, double step, double tol, int maxiter,
                       double* xbest, double* fbest, bint* conv) except -1:
        cdef double S[MAXD + 1][MAXD]
        cdef double fv[MAXD + 1]
        cdef double tmp[MAXD]
        cdef double cen[MAXD]
        cdef double xr[MAXD]
        cdef double xe[MAXD]
        cdef double xc[MAXD]
        cdef double fr, fe, fc, key
        cdef int i, k, j, it
        for k in range(d):
            S[0][k] = x0[k]
        for i in range(d):
            for k in range(d):
                S[i + 1][k] = x0[k]
            S[i + 1][i] += step
        for i in range(d + 1):
            fv[i] = self.objective(S[i])
        conv[0] = False
        it = 0
        while it < maxiter:
            for i in range(1, d + 1):
                for k in range(d):
                    tmp[k] = S[i][k]
                key = fv[i]
                j = i - 1
                while j >= 0 and fv[j] > key:
                    for k in range(d):
                        S[j + 1][k] = S[j][k]
                    fv[j + 1] = fv[j]
                    j -= 1
                for k in range(d):
                    S[j + 1][k] = tmp[k]
                fv[j + 1] = key
            if fv[d] - fv[0] <= tol * (1.0 + fabs(fv[0])):
                conv[0] = True
                break
            for k in range(d):
                cen[k] = 0.0
            for i in range(d):
                for k in range(d):
                    cen[k] += S[i][k]
            for k in range(d):
                cen[k] /= d
            for k in range(d):
                xr[k] = cen[k] + (cen[k] - S[d][k])
            fr = self.objective(xr)
            if fr < fv[0]:
                for k in range(d):
                    xe[k] = cen[k] + 2.0 * (cen[k] - S[d][k])
                fe = self.objective(xe)
                if fe < fr:
                    for k in range(d):
                        S[d][k] = xe[k]
                    fv[d] = fe
                else:
                    for k in range(d):
                        S[d][k] = xr[k]
                    fv[d] = fr
            elif fr < fv[d - 1]:
                for k in range(d):
                    S[d][k] = xr[k]
                fv[d] = fr
            elif fr < fv[d]:
                for k in range(d):
                    xc[k] = cen[k] + 0.5 * (cen[k] - S[d][k])
                fc = self.objective(xc)
                if fc <= fr:
                    for k in range(d):
                        S[d][k] = xc[k]
                    fv[d] = fc
                else:
                    for i in range(1, d + 1):
                        for k in range(d):
                            S[i][k] = S[0][k] + 0.5 * (S[i][k] - S[0][k])
                        fv[i] = self.objective(S[i])
            else:
                for k in range(d):
                    xc[k] = cen[k] - 0.5 * (cen[k] - S[d][k])
                fc = self.objective(xc)
                if fc < fv[d]:
                    for k in range(d):
                        S[d][k] = xc[k]
                    fv[d] = fc
                else:
                    for i in range(1, d + 1):
                        for k in range(d):
                            S[i][k] = S[0][k] + 0.5 * (S[i][k] - S[0][k])
                        fv[i] = self.objective(S[i])
            it += 1
        j = 0
        for i in range(1, d + 1):
            if fv[i] < fv[j]:
                j = i
        for k in range(d):
            xbest[k] = S[j][k]
        fbest[0] = fv[j]
        return 0


def polygon_search_2d(gk_enc, ht_enc, gd_enc, m, theta0, mu, tol, maxiter):
    """Penalized simplex descent over closed m-gons; see the reference backend."""
    cdef _Search st = _Search()
    cdef double x[MAXD]
    cdef double xout[MAXD]
    cdef double fx
    cdef bint conv, converged = False
    cdef int d = int(m), i, j, k
    cdef double steps[3]
    cdef double length, phi, min_gap, gap, dx, dy
    if d < 2 or d > MAXD:
        raise ValueError(f"polygon size {d} out of range 2..{MAXD}")
    st.gk = _Eval(gk_enc)
    st.ht = _Eval(ht_enc)
    st.gd = _Eval(gd_enc) if gd_enc is not None else None
    st.m = d
    st.mu = float(mu)
    st.warm_t0 = 0.0
    st.warm_t1 = 0.0
    st.warm = False
    st.nev = 0
    for i in range(d):
        x[i] = float(theta0[i])
    steps[0] = 0.35
    steps[1] = 0.02
    steps[2] = 0.002
    for j in range(3):
        st._nm_outer(x, d, steps[j], float(tol), int(maxiter), xout, &fx, &conv)
        for i in range(d):
            x[i] = xout[i]
        converged = converged or conv
    st.set_points(x)
    length = st.length()
    if st.m > 2 or st.gd is None:
        phi = st.phi(True)
    else:
        phi = st.phi(False)
    min_gap = 1e300
    for i in range(d):
        k = (i + 1) % d
        dx = st.qx[k] - st.qx[i]
        dy = st.qy[k] - st.qy[i]
        gap = hypot(dx, dy)
        if gap < min_gap:
            min_gap = gap
    thetas = [x[i] for i in range(d)]
    return length, phi, thetas, converged, st.nev, min_gap
