"""Minkowski billiard dynamics and shortest-trajectory search.

Positions move inside K, momenta live on the boundary of T.  Straight
segments carry velocity -grad g_T(p); at a boundary hit the momentum jumps
along the outer normal of K until it returns to the boundary of T.  The
h_T length of the bounce polygon is the symplectic action of the orbit.

The variational route searches closed boundary polygons that cannot be
translated into the interior of K.  That non-translatability constraint is
what makes the minimum the shortest orbit length: unconstrained descent of
the length functional alone collapses every polygon to a point, and actual
orbits are saddle points of it.  An exact penalty keeps the descent inside
the admissible set; the search kernel lives in minklab._core with compiled
and pure backends.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import _core
from . import bodies as B
from ._core import reference as _ref
from .errors import (
    GlidingOnsetError,
    NumericalFailureError,
    OptimizerConvergenceError,
    SymmetryRequiredError,
)


@dataclass(frozen=True)
class PhasePoint:
    q: np.ndarray
    p: np.ndarray


@dataclass(frozen=True)
class FlowConfig:
    max_bounces: int = 200
    closure_tol: float = 1e-6
    tangency_tol: float = 1e-8
    max_arc: float = math.inf

    def __post_init__(self):
        if self.max_bounces <= 0 or self.closure_tol <= 0 or self.tangency_tol <= 0 \
                or self.max_arc <= 0:
            raise ValueError("flow configuration fields must be positive")


@dataclass(frozen=True)
class ClosedBilliardTrajectory:
    bounce_points: list
    momenta: list
    length: float
    bounce_count: int
    closed: bool
    kind: str                    # "proper" | "gliding-suspected"
    closure_residual: float = 0.0


def trajectory_length(points, T: B.ConvexBody) -> float:
    """Cyclic h_T length of a closed polygon."""
    if len(points) < 2:
        raise ValueError("a closed trajectory needs at least 2 points")
    total = 0.0
    m = len(points)
    for j in range(m):
        total += T.support(points[(j + 1) % m] - points[j])
    return float(total)


def reflect(p: np.ndarray, n_q: np.ndarray, T: B.ConvexBody,
            tangency_tol: float = 1e-8) -> np.ndarray:
    """Momentum jump at a boundary hit: the unique p' = p + s n_q, s > 0,
    back on the boundary of T.  Requires the strict inward condition; a
    tangential hit is the gliding regime and is refused."""
    p = np.asarray(p, dtype=float)
    n_q = np.asarray(n_q, dtype=float)
    gp = T.gauge(p)
    if abs(gp - 1.0) > 1e-6:
        raise ValueError(f"momentum must start on the boundary of T (gauge {gp:.3g})")
    inward = float(T.gauge_grad(p) @ n_q)
    if inward >= -tangency_tol:
        raise GlidingOnsetError(
            f"tangential reflection (inner product {inward:.3g}); gliding onset"
        )

    def f(s):
        return T.gauge(p + s * n_q) - 1.0

    g_neg_p = T.gauge(-p)
    g_n = T.gauge(n_q)
    if g_n <= 0.0:
        raise NumericalFailureError("normal direction has nonpositive gauge")
    s_hi = 1.01 * (1.0 + g_neg_p) / g_n
    s_lo = 0.5 * s_hi
    guard = 0
    while f(s_lo) >= 0.0:
        s_lo *= 0.5
        guard += 1
        if guard > 2000:
            raise NumericalFailureError("no sign change found for the reflection root")
    s = brentq(f, s_lo, s_hi, xtol=1e-14, rtol=8.9e-16)
    out = p + s * n_q
    return out / T.gauge(out)


def _hit_boundary(K: B.ConvexBody, q: np.ndarray, v: np.ndarray) -> float:
    """Smallest t > 0 with q + t v on the boundary of K (g_K(q) < 1 assumed)."""
    gv = K.gauge(v)
    if gv <= 0.0:
        raise NumericalFailureError("flow velocity has nonpositive gauge")

    def f(t):
        return K.gauge(q + t * v) - 1.0

    t_hi = 1.01 * (1.0 + K.gauge(-q)) / gv
    t_lo = 0.5 * t_hi
    guard = 0
    while f(t_lo) >= 0.0:
        t_lo *= 0.5
        guard += 1
        if guard > 2000:
            raise NumericalFailureError("no sign change found for the boundary hit")
    return brentq(f, t_lo, t_hi, xtol=1e-12, rtol=8.9e-16)


def flow(K: B.ConvexBody, T: B.ConvexBody, start: PhasePoint,
         cfg: FlowConfig = FlowConfig()) -> ClosedBilliardTrajectory:
    """Integrate the characteristic flow from an interior phase point until
    closure, bounce exhaustion, or gliding onset.

    Closure is tested during each straight segment (the start point sits in
    the interior, so a period ends mid-segment, not at a bounce), and only
    after the first bounce so the launch segment cannot close instantly.
    """
    if not (K.is_smooth and T.is_smooth):
        raise B.NonSmoothBodyError("flow needs gauge gradients on both bodies")
    q0 = np.asarray(start.q, dtype=float)
    p0 = np.asarray(start.p, dtype=float)
    if abs(T.gauge(p0) - 1.0) > 1e-8:
        raise ValueError("start momentum must lie on the boundary of T")
    if K.gauge(q0) >= 1.0 - 1e-12:
        raise ValueError("start position must be interior to K")

    q = q0.copy()
    p = p0.copy()
    bounce_points = []
    momenta = []
    arc = 0.0
    kind = "proper"
    closed = False
    residual = math.inf

    for _ in range(cfg.max_bounces):
        v = -T.gauge_grad(p)
        t_hit = _hit_boundary(K, q, v)
        if bounce_points and np.linalg.norm(p - p0) <= cfg.closure_tol:
            vv = float(v @ v)
            t0 = float((q0 - q) @ v) / vv
            if -1e-12 <= t0 <= t_hit:
                res = float(np.linalg.norm(q + t0 * v - q0))
                if res <= cfg.closure_tol:
                    closed = True
                    residual = res
                    break
        q_hit = q + t_hit * v
        q_hit = q_hit / K.gauge(q_hit)
        arc += float(np.linalg.norm(q_hit - q))
        if arc > cfg.max_arc:
            q = q_hit
            break
        try:
            p = reflect(p, K.gauge_grad(q_hit), T, cfg.tangency_tol)
        except GlidingOnsetError:
            kind = "gliding-suspected"
            bounce_points.append(q_hit)
            break
        q = q_hit
        bounce_points.append(q_hit)
        momenta.append(p.copy())

    if closed and len(bounce_points) >= 2:
        length = trajectory_length(bounce_points, T)
    elif len(bounce_points) >= 2:
        length = float(sum(T.support(bounce_points[j + 1] - bounce_points[j])
                           for j in range(len(bounce_points) - 1)))
    else:
        length = 0.0
    return ClosedBilliardTrajectory(
        bounce_points=bounce_points,
        momenta=momenta,
        length=length,
        bounce_count=len(bounce_points),
        closed=closed,
        kind=kind,
        closure_residual=residual if closed else math.inf,
    )


def two_bounce_shortest(K: B.ConvexBody, T: B.ConvexBody) -> ClosedBilliardTrajectory:
    """Shortest 2-periodic trajectory of a symmetric pair: bounce points at
    the tangency of the largest T-polar copy inside K, length 4 inrad."""
    if not (K.centrally_symmetric and T.centrally_symmetric):
        raise SymmetryRequiredError("the 2-bounce formula needs symmetric K and T")
    r, info = B.inradius_wrt_witness(K, B.polar(T))
    q0 = np.asarray(info["contact"], dtype=float)
    points = [q0, -q0]
    momenta = [T.support_point(-(points[1] - points[0])),
               T.support_point(-(points[0] - points[1]))]
    return ClosedBilliardTrajectory(
        bounce_points=points,
        momenta=momenta,
        length=4.0 * r,
        bounce_count=2,
        closed=True,
        kind="proper",
    )


# ---------------------------------------------------------------------------
# variational search


def _gauge_enc(body: B.ConvexBody):
    rep = body.rep
    if isinstance(rep, B.EllipsoidRep):
        return (_core.QUAD, rep.shape, 0.0, 1.0, None)
    if isinstance(rep, B.PBallRep):
        return (_core.PNORM, None, float(rep.p), 1.0 / rep.radius, None)
    if body.is_polytope:
        h = body.hrep
        return (_core.MAXDOT, h.normals / h.offsets[:, None], 0.0, 1.0, None)
    return (_core.CALLABLE, None, 0.0, 0.0, body.gauge)


def _support_enc(body: B.ConvexBody):
    rep = body.rep
    if isinstance(rep, B.EllipsoidRep):
        return (_core.QUAD, np.linalg.inv(rep.shape), 0.0, 1.0, None)
    if isinstance(rep, B.PBallRep):
        q = rep.p / (rep.p - 1.0)
        return (_core.PNORM, None, q, float(rep.radius), None)
    if body.is_polytope:
        return (_core.MAXDOT, body.vrep.vertices, 0.0, 1.0, None)
    return (_core.CALLABLE, None, 0.0, 0.0, body.support)


def _diff_gauge_enc(K: B.ConvexBody):
    """Gauge of the difference body K - K, the closed-form 2-gon
    admissibility test; None when no exact encoding exists."""
    if K.centrally_symmetric:
        kind, mat, p, c, fn = _gauge_enc(K)
        if kind == _core.MAXDOT:
            return (kind, np.asarray(mat) * 0.5, p, c, fn)
        if kind == _core.CALLABLE:
            return (kind, mat, p, c, lambda x: fn(x) * 0.5)
        return (kind, mat, p, c * 0.5, fn)
    if K.is_polytope and K.dim <= B.EXACT_DIM_CAP:
        diff = B.minkowski_sum(K, B.linear_image(K, -np.eye(K.dim)))
        h = diff.hrep
        return (_core.MAXDOT, h.normals / h.offsets[:, None], 0.0, 1.0, None)
    return None


def _diff_gauge_fn(K: B.ConvexBody):
    if K.centrally_symmetric:
        return lambda d: 0.5 * K.gauge(d)
    if K.is_polytope and K.dim <= B.EXACT_DIM_CAP:
        diff = B.minkowski_sum(K, B.linear_image(K, -np.eye(K.dim)))
        return diff.gauge
    return None


def _width_pair_upper(K: B.ConvexBody, T: B.ConvexBody, dirs) -> float:
    """Length of the best two-bounce candidate over a direction grid; these
    support-point pairs are never translatable into the interior, so their
    length bounds the optimum from above (used to size the penalty)."""
    best = math.inf
    for u in dirs:
        a = K.support_point(u)
        b = K.support_point(-u)
        val = T.support(a - b) + T.support(b - a)
        if val < best:
            best = val
    return best


_GAP_TOL = 1e-6
_PHI_TOL = 1e-6


def _assemble(points, T: B.ConvexBody) -> ClosedBilliardTrajectory:
    m = len(points)
    momenta = [T.support_point(-(points[(j + 1) % m] - points[j])) for j in range(m)]
    return ClosedBilliardTrajectory(
        bounce_points=[np.asarray(q, dtype=float) for q in points],
        momenta=momenta,
        length=trajectory_length(points, T),
        bounce_count=m,
        closed=True,
        kind="proper",
    )


def _planar_starts(K: B.ConvexBody, m: int, s: int, seed: int):
    if s < 8:
        base = 2.0 * math.pi * s / 8.0
        thetas = []
        for k in range(m):
            a = base + 2.0 * math.pi * k / m
            sp = K.support_point(np.array([math.cos(a), math.sin(a)]))
            thetas.append(math.atan2(sp[1], sp[0]))
        return thetas
    rng = np.random.default_rng([seed, m, s])
    return list(rng.uniform(0.0, 2.0 * math.pi, m))


def _search_planar(K, T, m_max, starts, seed):
    gk = _gauge_enc(K)
    ht = _support_enc(T)
    gd = _diff_gauge_enc(K)
    l_up = _width_pair_upper(K, T, B._unit_circle(64))
    mu = 10.0 * l_up
    best_any = None
    candidates = []
    for boost in (1.0, 8.0):
        for m in range(2, m_max + 1):
            for s in range(starts):
                theta0 = _planar_starts(K, m, s, seed)
                length, phi, thetas, conv, _, gap = _core.polygon_search_2d(
                    gk, ht, gd, m, theta0, mu * boost, 1e-8, 300 * m
                )
                rec = (length, m, thetas, conv)
                if best_any is None or length < best_any[0]:
                    best_any = rec
                if gap < _GAP_TOL or phi < 1.0 - _PHI_TOL:
                    continue
                candidates.append(rec)
        if candidates:
            break
    return candidates, best_any


def _planar_points(K, thetas):
    pts = []
    for t in thetas:
        u = np.array([math.cos(t), math.sin(t)])
        pts.append(u / K.gauge(u))
    return pts


def _search_nd(K, T, m_max, starts, seed):
    n = K.dim
    dirs = B._fixed_sphere_dirs(n, 64)
    l_up = _width_pair_upper(K, T, dirs)
    mu = 10.0 * l_up
    diff_gauge = _diff_gauge_fn(K)
    best_any = None
    candidates = []

    def make_objective(m, mu_eff, warm):
        def phi_of(qs, precise):
            if m == 2 and diff_gauge is not None:
                return diff_gauge(qs[0] - qs[1])
            scale = float(np.mean([np.linalg.norm(q) for q in qs]))

            def psi(t):
                tv = np.asarray(t)
                return max(K.gauge(q + tv) for q in qs)

            if precise:
                t = list(warm["t"])
                val = None
                for step in (0.3 * scale, 0.03 * scale, 0.003 * scale):
                    t, val, _, _ = _ref.nelder_mead(psi, t, step, 1e-12, 400)
                return val
            step = 0.3 * scale if not warm["set"] else 0.05 * scale
            t, val, _, _ = _ref.nelder_mead(psi, warm["t"], step, 1e-9, 140)
            warm["t"] = t
            warm["set"] = True
            return val

        def points_of(x):
            d = np.asarray(x, dtype=float).reshape(m, n)
            qs = []
            for j in range(m):
                g = K.gauge(d[j])
                if g < 1e-12:
                    return None
                qs.append(d[j] / g)
            return qs

        def objective(x):
            qs = points_of(x)
            if qs is None:
                return 1e9 * mu_eff
            length = sum(T.support(qs[(j + 1) % m] - qs[j]) for j in range(m))
            pen = 1.0 - phi_of(qs, False)
            return length + mu_eff * pen if pen > 0.0 else length

        return objective, points_of, phi_of

    for boost in (1.0, 8.0):
        for m in range(2, m_max + 1):
            for s in range(starts):
                if s < 8:
                    if m == 2:
                        d0 = np.concatenate([dirs[s], -dirs[s]])
                    else:
                        d0 = np.concatenate([dirs[(s + k) % len(dirs)] for k in range(m)])
                else:
                    d0 = np.random.default_rng([seed, m, s]).normal(size=m * n)
                warm = {"t": [0.0] * n, "set": False}
                objective, points_of, phi_of = make_objective(m, mu * boost, warm)
                x = list(map(float, d0))
                conv = False
                for step in (0.35, 0.02, 0.002):
                    x, fx, c, _ = _ref.nelder_mead(objective, x, step, 1e-8, 400 * m)
                    conv = conv or c
                qs = points_of(x)
                if qs is None:
                    continue
                length = sum(T.support(qs[(j + 1) % m] - qs[j]) for j in range(m))
                phi = phi_of(qs, True)
                gap = min(np.linalg.norm(qs[(j + 1) % m] - qs[j]) for j in range(m))
                rec = (float(length), m, qs, conv)
                if best_any is None or length < best_any[0]:
                    best_any = rec
                if gap < _GAP_TOL or phi < 1.0 - _PHI_TOL:
                    continue
                candidates.append(rec)
        if candidates:
            break
    return candidates, best_any


def shortest_closed(K: B.ConvexBody, T: B.ConvexBody, m_max: Optional[int] = None,
                    starts: int = 32, seed: int = 0) -> ClosedBilliardTrajectory:
    """Shortest closed (K, T)-trajectory by multi-start penalized descent
    over boundary polygons with 2..m_max vertices.

    Degenerate minima (consecutive bounce points closer than 1e-6) and
    polygons that can be translated into the interior are discarded.  For
    centrally symmetric pairs the result matches two_bounce_shortest.
    """
    if K.dim != T.dim:
        raise B.DimensionMismatchError("K and T must share a dimension")
    if m_max is None:
        m_max = K.dim + 1
    if m_max < 2:
        raise ValueError("m_max must be at least 2")
    if K.dim == 2:
        candidates, best_any = _search_planar(K, T, m_max, starts, seed)
        to_points = lambda rec: _planar_points(K, rec[2])
    else:
        candidates, best_any = _search_nd(K, T, m_max, starts, seed)
        to_points = lambda rec: rec[2]
    if not candidates:
        fallback = None
        if best_any is not None:
            fallback = _assemble(to_points(best_any), T)
        raise OptimizerConvergenceError(
            "no admissible non-degenerate trajectory found", best=fallback
        )
    if not any(rec[3] for rec in candidates):
        best = min(candidates, key=lambda rec: rec[0])
        raise OptimizerConvergenceError(
            "descent hit the iteration cap on every admissible candidate",
            best=_assemble(to_points(best), T),
        )
    best = min(candidates, key=lambda rec: rec[0])
    return _assemble(to_points(best), T)


@dataclass(frozen=True)
class XiReport:
    xi: float
    inrad: float
    bounds_ok: bool
    vol_ratio: float
    trajectory: ClosedBilliardTrajectory


def xi_euclidean(K: B.ConvexBody, m_max: Optional[int] = None, starts: int = 32,
                 seed: int = 0) -> XiReport:
    """Shortest Euclidean billiard length xi(K), with the inradius bounds
    4 inrad <= xi <= 2 (n+1) inrad checked and the scale-free volume ratio
    xi / (sqrt(n) Vol^{1/n}) reported."""
    n = K.dim
    ball = B.ball(1.0, n)
    traj = shortest_closed(K, ball, m_max=m_max, starts=starts, seed=seed)
    xi = traj.length
    inrad = B.euclidean_inradius(K)
    ok = (4.0 * inrad - 1e-6 <= xi <= 2.0 * (n + 1) * inrad + 1e-6)
    from .volume import volume
    vol = volume(K).value
    ratio = xi / (math.sqrt(n) * vol ** (1.0 / n))
    return XiReport(xi=xi, inrad=inrad, bounds_ok=ok, vol_ratio=ratio, trajectory=traj)


# ---------------------------------------------------------------------------
# export


def trajectory_csv_rows(traj: ClosedBilliardTrajectory, T: B.ConvexBody):
    """Rows (m, j, q..., p..., segment_length) for the bounce polygon."""
    rows = []
    m = traj.bounce_count
    for j, q in enumerate(traj.bounce_points):
        p = traj.momenta[j] if j < len(traj.momenta) else np.full_like(q, math.nan)
        if traj.closed:
            seg = T.support(traj.bounce_points[(j + 1) % m] - q)
        elif j + 1 < m:
            seg = T.support(traj.bounce_points[j + 1] - q)
        else:
            seg = math.nan
        rows.append([m, j, *np.asarray(q, dtype=float).tolist(),
                     *np.asarray(p, dtype=float).tolist(), float(seg)])
    return rows


def trajectory_summary(traj: ClosedBilliardTrajectory) -> dict:
    return {
        "length": traj.length,
        "kind": traj.kind,
        "closed": traj.closed,
        "bounce_count": traj.bounce_count,
        "closure_residual": None if math.isinf(traj.closure_residual)
        else traj.closure_residual,
    }
