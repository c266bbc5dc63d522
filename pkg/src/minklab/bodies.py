"""Convex bodies with the origin interior, and the geometry used everywhere else.

A body is stored in one of five representations: facet halfspaces (H-polytope),
vertex hulls (V-polytope), ellipsoids ``{x : x^T Q x <= 1}``, even-exponent
p-balls, or a support-function oracle.  Every body answers ``support(u)`` and
``gauge(x)``; polytopes convert between H and V forms on demand (cached, exact
enumeration capped at dimension 8).

Conventions: bodies are compact with the origin strictly interior, so gauges
are finite and polarity is an involution.  Phase-space bodies use coordinates
ordered ``(q_1..q_n, p_1..p_n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.spatial import ConvexHull, QhullError

from .errors import (
    DegenerateBodyError,
    DimensionCapError,
    DimensionMismatchError,
    MinklabError,
    NonSmoothBodyError,
    NotPolytopeError,
    NumericalFailureError,
    OriginNotInteriorError,
    UnboundedBodyError,
)

EXACT_DIM_CAP = 8          # hulls / conversions / fan volumes beyond this are refused
DEDUP_TOL = 1e-10          # normalized-key tolerance for facet/vertex dedup
SYMMETRY_TOL = 1e-9

__all__ = [
    "ConvexBody",
    "HPolytopeRep",
    "VPolytopeRep",
    "EllipsoidRep",
    "PBallRep",
    "OracleRep",
    "HannerTree",
    "hpolytope",
    "vpolytope",
    "ellipsoid",
    "ball",
    "pball",
    "support_oracle",
    "cube",
    "cross_polytope",
    "interval",
    "polar",
    "convert",
    "minkowski_sum",
    "linear_image",
    "scale_body",
    "direct_product",
    "free_sum",
    "product_body",
    "polydisc",
    "hanner",
    "enumerate_hanner_trees",
    "inradius_wrt",
    "inradius_wrt_witness",
    "euclidean_inradius",
    "random_symmetric_polytope",
    "is_quarter_symmetric",
]


# ---------------------------------------------------------------------------
# representations


@dataclass(frozen=True, eq=False)
class HPolytopeRep:
    """Intersection of halfspaces <a_i, x> <= b_i with all b_i > 0."""

    normals: np.ndarray
    offsets: np.ndarray

    @property
    def dim(self):
        return self.normals.shape[1]


@dataclass(frozen=True, eq=False)
class VPolytopeRep:
    """Convex hull of an irredundant vertex list."""

    vertices: np.ndarray

    @property
    def dim(self):
        return self.vertices.shape[1]


@dataclass(frozen=True, eq=False)
class EllipsoidRep:
    """{x : x^T shape x <= 1} for symmetric positive definite shape."""

    shape: np.ndarray

    @property
    def dim(self):
        return self.shape.shape[0]


@dataclass(frozen=True, eq=False)
class PBallRep:
    """Scaled l_p ball with even integer exponent (smooth boundary)."""

    p: int
    radius: float
    ndim: int

    @property
    def dim(self):
        return self.ndim


@dataclass(frozen=True, eq=False)
class OracleRep:
    """Support-function body; optional closed-form gauge and gradients."""

    support_fn: Callable[[np.ndarray], float]
    ndim: int
    gauge_fn: Optional[Callable[[np.ndarray], float]] = None
    gauge_grad_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    support_point_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    gauge_batch_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    polar_source: Optional["ConvexBody"] = None

    @property
    def dim(self):
        return self.ndim


# ---------------------------------------------------------------------------
# small numeric helpers


def _as_matrix(rows, name="array"):
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise MinklabError(f"{name} must be a non-empty 2-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise MinklabError(f"{name} contains non-finite entries")
    return arr


def _as_vector(x, dim=None, name="vector"):
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        v = v.reshape(-1)
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatchError(f"{name} has length {v.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise MinklabError(f"{name} contains non-finite entries")
    return v


def _dedup_rows(arr, tol=DEDUP_TOL):
    # normalized-key hashing: round to the tolerance grid, keep first occurrence
    keys = np.round(arr / tol).astype(np.int64)
    seen = set()
    keep = []
    for i, key in enumerate(map(tuple, keys)):
        if key not in seen:
            seen.add(key)
            keep.append(i)
    return arr[keep]


def _hull(points):
    try:
        return ConvexHull(points)
    except QhullError as exc:
        raise DegenerateBodyError(f"degenerate point set (qhull: {str(exc).splitlines()[0]})") from exc


def _origin_strictly_inside(hull, scale):
    # hull equations are  a.x + c <= 0 ; the origin is interior iff every c < 0
    return bool(np.all(hull.equations[:, -1] < -1e-12 * max(scale, 1.0)))


def _unit_circle(count):
    theta = np.linspace(0.0, 2.0 * math.pi, count, endpoint=False)
    return np.column_stack([np.cos(theta), np.sin(theta)])


_FIXED_SPHERE_CACHE: dict = {}


def _fixed_sphere_dirs(dim, count):
    """Deterministic quasi-uniform unit directions (shared across calls)."""
    key = (dim, count)
    if key not in _FIXED_SPHERE_CACHE:
        rng = np.random.default_rng(97531)
        pts = rng.standard_normal((count, dim))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        axes = np.vstack([np.eye(dim), -np.eye(dim)])
        _FIXED_SPHERE_CACHE[key] = np.vstack([axes, pts])
    return _FIXED_SPHERE_CACHE[key]


def _refine_angle(f, minimize_it=True, grid=2048):
    """Grid scan plus golden-section refinement of f(theta) on the circle."""
    sign = 1.0 if minimize_it else -1.0
    theta = np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False)
    vals = np.array([sign * f(t) for t in theta])
    k = int(np.argmin(vals))
    span = 2.0 * math.pi / grid
    lo, hi = theta[k] - span, theta[k] + span
    res = minimize_scalar(lambda t: sign * f(t), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    best_t = float(res.x) if res.fun <= vals[k] else float(theta[k])
    best_v = min(float(res.fun), float(vals[k]))
    return best_t, sign * best_v


def _refine_direction(f, dim, minimize_it=True, starts=4):
    """Minimize/maximize a 0-homogeneous f over the unit sphere (dim >= 3)."""
    sign = 1.0 if minimize_it else -1.0
    dirs = _fixed_sphere_dirs(dim, 512)
    vals = np.array([sign * f(u) for u in dirs])
    order = np.argsort(vals)[:starts]

    def wrapped(v):
        nv = np.linalg.norm(v)
        if nv < 1e-9:
            return 1e300
        return sign * f(v / nv)

    best_u, best_v = None, math.inf
    for idx in order:
        res = minimize(wrapped, dirs[idx], method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-13, "maxiter": 2000})
        if res.fun < best_v:
            best_v = float(res.fun)
            best_u = np.asarray(res.x, dtype=float)
    best_u = best_u / np.linalg.norm(best_u)
    return best_u, sign * best_v


def _pnorm(x, p):
    ax = np.abs(x)
    m = float(ax.max(initial=0.0))
    if m == 0.0:
        return 0.0
    return m * float(np.sum((ax / m) ** p)) ** (1.0 / p)


def _pnorm_grad(x, p):
    ax = np.abs(x)
    n = _pnorm(x, p)
    if n == 0.0:
        raise NumericalFailureError("p-norm gradient at the origin")
    return np.sign(x) * (ax / n) ** (p - 1.0)


# ---------------------------------------------------------------------------
# the body wrapper


class ConvexBody:
    """A compact convex set with the origin in its interior.

    Wraps one representation and caches derived data (the other polytope
    representation, the polar, oracle direction grids).  Instances are
    immutable in intent; do not mutate the stored arrays.
    """

    def __init__(self, rep, centrally_symmetric=None, _validate=True):
        self.rep = rep
        self.dim = rep.dim
        self._hrep = rep if isinstance(rep, HPolytopeRep) else None
        self._vrep = rep if isinstance(rep, VPolytopeRep) else None
        self._polar_cache = None
        self._grid_cache = None
        if centrally_symmetric is None:
            centrally_symmetric = self._detect_symmetry()
        self.centrally_symmetric = bool(centrally_symmetric)
        if _validate and self.centrally_symmetric:
            self._check_symmetry_sample()

    # -- representation predicates ------------------------------------

    @property
    def is_polytope(self):
        return isinstance(self.rep, (HPolytopeRep, VPolytopeRep))

    @property
    def is_smooth(self):
        if isinstance(self.rep, (EllipsoidRep, PBallRep)):
            return True
        return isinstance(self.rep, OracleRep) and self.rep.gauge_grad_fn is not None

    # -- symmetry ------------------------------------------------------

    def _detect_symmetry(self):
        rep = self.rep
        if isinstance(rep, (EllipsoidRep, PBallRep)):
            return True
        if isinstance(rep, VPolytopeRep):
            return _point_set_equal(rep.vertices, -rep.vertices)
        if isinstance(rep, HPolytopeRep):
            rows = np.column_stack([rep.normals, rep.offsets])
            neg = np.column_stack([-rep.normals, rep.offsets])
            return _point_set_equal(rows, neg)
        return False

    def _check_symmetry_sample(self, count=32):
        if isinstance(self.rep, (EllipsoidRep, PBallRep)):
            return
        dirs = _fixed_sphere_dirs(self.dim, count)[: 2 * self.dim + count]
        for u in dirs:
            a, b = self.support(u), self.support(-u)
            if abs(a - b) > SYMMETRY_TOL * max(1.0, abs(a)):
                raise MinklabError(
                    "body flagged centrally symmetric but support differs at ±u "
                    f"({a} vs {b})")

    # -- core evaluations ------------------------------------------------

    def support(self, u):
        """h(u) = sup over the body of <x, u>."""
        u = _as_vector(u, self.dim, "direction")
        rep = self.rep
        if isinstance(rep, VPolytopeRep):
            return float(np.max(rep.vertices @ u))
        if isinstance(rep, HPolytopeRep):
            return float(np.max(self.vrep.vertices @ u))
        if isinstance(rep, EllipsoidRep):
            return float(math.sqrt(max(u @ self._shape_inv() @ u, 0.0)))
        if isinstance(rep, PBallRep):
            return rep.radius * _pnorm(u, _dual_exponent(rep.p))
        return float(rep.support_fn(u))

    def gauge(self, x):
        """g(x) = inf {r > 0 : x in r*body}; finite since the origin is interior."""
        x = _as_vector(x, self.dim, "point")
        rep = self.rep
        if isinstance(rep, HPolytopeRep):
            return float(np.max(rep.normals @ x / rep.offsets, initial=0.0))
        if isinstance(rep, VPolytopeRep):
            h = self.hrep
            return float(np.max(h.normals @ x / h.offsets, initial=0.0))
        if isinstance(rep, EllipsoidRep):
            return float(math.sqrt(max(x @ rep.shape @ x, 0.0)))
        if isinstance(rep, PBallRep):
            return _pnorm(x, rep.p) / rep.radius
        if rep.gauge_fn is not None:
            return float(rep.gauge_fn(x))
        return self._oracle_gauge(x)

    def gauge_batch(self, pts):
        """Vectorized gauge for an (N, dim) array of points."""
        pts = np.asarray(pts, dtype=float)
        rep = self.rep
        if isinstance(rep, (HPolytopeRep, VPolytopeRep)):
            h = self.hrep
            return np.max(pts @ h.normals.T / h.offsets, axis=1)
        if isinstance(rep, EllipsoidRep):
            return np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", pts, rep.shape, pts), 0.0))
        if isinstance(rep, PBallRep):
            ax = np.abs(pts)
            m = np.maximum(ax.max(axis=1), 1e-300)
            return m * np.sum((ax / m[:, None]) ** rep.p, axis=1) ** (1.0 / rep.p) / rep.radius
        if rep.gauge_batch_fn is not None:
            return np.asarray(rep.gauge_batch_fn(pts), dtype=float)
        if rep.gauge_fn is not None:
            return np.array([float(rep.gauge_fn(x)) for x in pts])
        # grid bound: max over a fixed direction fan of <x,u>/h(u).  Slight
        # underestimate (resolution-limited), adequate for sampling volumes.
        U, hv = self._oracle_grid()
        out = np.empty(len(pts))
        chunk = 4096
        for i in range(0, len(pts), chunk):
            out[i:i + chunk] = np.max(pts[i:i + chunk] @ U.T / hv, axis=1)
        return out

    def _oracle_grid(self):
        if self._grid_cache is None:
            U = _unit_circle(1440) if self.dim == 2 else _fixed_sphere_dirs(self.dim, 8192)
            hv = np.array([float(self.rep.support_fn(u)) for u in U])
            if np.any(hv <= 0):
                raise OriginNotInteriorError("oracle support non-positive on some direction")
            self._grid_cache = (U, hv)
        return self._grid_cache

    def _oracle_gauge(self, x):
        # g(x) = sup_u <x,u>/h(u); refine the fan maximum for a single point
        nx = np.linalg.norm(x)
        if nx == 0.0:
            return 0.0
        fn = self.rep.support_fn
        if self.dim == 2:
            def ratio(t):
                u = np.array([math.cos(t), math.sin(t)])
                return float(x @ u) / float(fn(u))
            _, val = _refine_angle(ratio, minimize_it=False)
        else:
            def ratio_u(u):
                return float(x @ u) / float(fn(u))
            _, val = _refine_direction(ratio_u, self.dim, minimize_it=False)
        return max(val, 0.0)

    def support_point(self, u):
        """A maximizer of <x, u> over the body (lowest index on vertex ties)."""
        u = _as_vector(u, self.dim, "direction")
        rep = self.rep
        if isinstance(rep, VPolytopeRep):
            vals = rep.vertices @ u
            return rep.vertices[int(np.argmax(vals))].copy()
        if isinstance(rep, HPolytopeRep):
            v = self.vrep.vertices
            return v[int(np.argmax(v @ u))].copy()
        if isinstance(rep, EllipsoidRep):
            w = self._shape_inv() @ u
            h = math.sqrt(max(u @ w, 0.0))
            if h == 0.0:
                raise NumericalFailureError("support point of zero direction")
            return w / h
        if isinstance(rep, PBallRep):
            q = _dual_exponent(rep.p)
            return rep.radius * _pnorm_grad(u, q)
        if rep.support_point_fn is not None:
            return np.asarray(rep.support_point_fn(u), dtype=float)
        return self._fd_support_point(u)

    def _fd_support_point(self, u, rel_step=1e-6):
        # gradient of the support function equals the (unique) support point
        fn = self.rep.support_fn
        step = rel_step * max(np.linalg.norm(u), 1.0)
        g = np.empty(self.dim)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = step
            g[i] = (float(fn(u + e)) - float(fn(u - e))) / (2 * step)
        return g

    def gauge_grad(self, x):
        """Gradient of the gauge at x != 0 (smooth representations only)."""
        x = _as_vector(x, self.dim, "point")
        rep = self.rep
        if isinstance(rep, EllipsoidRep):
            g = self.gauge(x)
            if g == 0.0:
                raise NumericalFailureError("gauge gradient at the origin")
            return (rep.shape @ x) / g
        if isinstance(rep, PBallRep):
            return _pnorm_grad(x, rep.p) / rep.radius
        if isinstance(rep, OracleRep) and rep.gauge_grad_fn is not None:
            return np.asarray(rep.gauge_grad_fn(x), dtype=float)
        raise NonSmoothBodyError(
            f"{type(rep).__name__} does not expose a gauge gradient")

    def bounding_box(self):
        """Axis-aligned [lo, hi] per coordinate from support evaluations."""
        lo = np.empty(self.dim)
        hi = np.empty(self.dim)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = 1.0
            hi[i] = self.support(e)
            lo[i] = -self.support(-e)
        return lo, hi

    # -- polytope representation access ---------------------------------

    @property
    def hrep(self) -> HPolytopeRep:
        if self._hrep is None:
            if not self.is_polytope:
                raise NotPolytopeError("H-representation requires a polytope")
            self._hrep = _vertices_to_hrep(self._vrep.vertices)
        return self._hrep

    @property
    def vrep(self) -> VPolytopeRep:
        if self._vrep is None:
            if not self.is_polytope:
                raise NotPolytopeError("V-representation requires a polytope")
            self._vrep = _hrep_to_vrep(self._hrep)
        return self._vrep

    def _shape_inv(self):
        if not hasattr(self, "_shape_inv_cache"):
            self._shape_inv_cache = np.linalg.inv(self.rep.shape)
        return self._shape_inv_cache

    def __repr__(self):
        kind = type(self.rep).__name__.replace("Rep", "")
        sym = "symmetric" if self.centrally_symmetric else "general"
        return f"<ConvexBody {kind} dim={self.dim} {sym}>"


def _point_set_equal(a, b, tol=1e-9):
    if a.shape != b.shape:
        return False
    scale = max(1.0, float(np.abs(a).max()))
    ka = {tuple(np.round(row / (tol * scale)).astype(np.int64)) for row in a}
    kb = {tuple(np.round(row / (tol * scale)).astype(np.int64)) for row in b}
    return ka == kb


def _dual_exponent(p):
    return p / (p - 1.0)


# ---------------------------------------------------------------------------
# constructors


def hpolytope(normals, offsets, centrally_symmetric=None, _validate=True):
    """Body {x : <a_i, x> <= b_i}. Requires b_i > 0 and a bounded intersection."""
    A = _as_matrix(normals, "normals")
    b = _as_vector(offsets, A.shape[0], "offsets")
    if np.any(b <= 0):
        raise OriginNotInteriorError("all offsets must be positive (origin interior)")
    norms = np.linalg.norm(A, axis=1)
    if np.any(norms < 1e-14):
        raise MinklabError("zero normal vector in H-representation")
    scaled = np.column_stack([A / norms[:, None], b / norms])
    scaled = _dedup_rows(scaled)
    A, b = scaled[:, :-1], scaled[:, -1]
    if _validate:
        _check_bounded(A)
    return ConvexBody(HPolytopeRep(A, b), centrally_symmetric)


def _check_bounded(normals):
    n = normals.shape[1]
    if n == 1:
        if not (np.any(normals[:, 0] > 0) and np.any(normals[:, 0] < 0)):
            raise UnboundedBodyError("1-d halfspace set does not bound an interval")
        return
    if np.linalg.matrix_rank(normals) < n:
        raise UnboundedBodyError("facet normals do not span the space")
    # bounded iff the normals positively span R^n iff 0 is interior to their hull
    try:
        hull = ConvexHull(normals)
    except QhullError as exc:
        raise UnboundedBodyError(f"cannot certify boundedness (qhull: {exc})") from exc
    if not _origin_strictly_inside(hull, float(np.abs(normals).max())):
        raise UnboundedBodyError("facet normals do not positively span the space")


def vpolytope(vertices, recenter=False, centrally_symmetric=None):
    """Convex hull of points. Origin must be strictly interior (or recenter)."""
    V = _as_matrix(vertices, "vertices")
    if recenter:
        V = V - V.mean(axis=0)
    n = V.shape[1]
    if n > EXACT_DIM_CAP:
        raise DimensionCapError(f"V-polytope construction capped at dim {EXACT_DIM_CAP}")
    if n == 1:
        lo, hi = float(V.min()), float(V.max())
        if not (lo < 0.0 < hi):
            raise OriginNotInteriorError("origin not interior to the interval")
        rep = VPolytopeRep(np.array([[lo], [hi]]))
        return ConvexBody(rep, centrally_symmetric)
    if V.shape[0] < n + 1 or np.linalg.matrix_rank(V - V[0]) < n:
        raise DegenerateBodyError("vertex set is not full-dimensional")
    hull = _hull(V)
    if not _origin_strictly_inside(hull, float(np.abs(V).max())):
        raise OriginNotInteriorError("origin not strictly inside the hull")
    keep = np.sort(hull.vertices)
    return ConvexBody(VPolytopeRep(V[keep]), centrally_symmetric)


def ellipsoid(shape_matrix):
    """Body {x : x^T Q x <= 1} for symmetric positive definite Q."""
    Q = _as_matrix(shape_matrix, "shape matrix")
    if Q.shape[0] != Q.shape[1]:
        raise DimensionMismatchError("shape matrix must be square")
    if np.abs(Q - Q.T).max() > 1e-12 * max(1.0, np.abs(Q).max()):
        raise MinklabError("shape matrix must be symmetric")
    Q = 0.5 * (Q + Q.T)
    if np.linalg.eigvalsh(Q).min() <= 0:
        raise MinklabError("shape matrix must be positive definite")
    return ConvexBody(EllipsoidRep(Q), True)


def ellipsoid_semiaxes(semiaxes):
    a = _as_vector(semiaxes, name="semiaxes")
    if np.any(a <= 0):
        raise MinklabError("semiaxes must be positive")
    return ellipsoid(np.diag(1.0 / a ** 2))


def ball(radius=1.0, dim=2):
    if radius <= 0:
        raise MinklabError("radius must be positive")
    return ellipsoid(np.eye(dim) / radius ** 2)


def pball(p, radius=1.0, dim=2):
    """l_p ball of given radius; p must be an even integer >= 2 (smooth)."""
    if int(p) != p or p < 2 or p % 2 != 0:
        raise MinklabError("p-ball exponent must be an even integer >= 2")
    if radius <= 0:
        raise MinklabError("radius must be positive")
    if dim < 1:
        raise DimensionMismatchError("dim must be >= 1")
    return ConvexBody(PBallRep(int(p), float(radius), int(dim)), True)


def support_oracle(support_fn, dim, gauge_fn=None, gauge_grad_fn=None,
                   support_point_fn=None, gauge_batch_fn=None,
                   centrally_symmetric=False, polar_source=None):
    """Wrap a support function h(u) as a body. Gauge falls back to a
    directional maximization of <x,u>/h(u) when no closed form is given."""
    rep = OracleRep(support_fn, int(dim), gauge_fn, gauge_grad_fn,
                    support_point_fn, gauge_batch_fn, polar_source)
    return ConvexBody(rep, centrally_symmetric)


def cube(dim, half_width=1.0):
    A = np.vstack([np.eye(dim), -np.eye(dim)])
    return hpolytope(A, np.full(2 * dim, float(half_width)),
                     centrally_symmetric=True, _validate=False)


def cross_polytope(dim, radius=1.0):
    V = np.vstack([np.eye(dim), -np.eye(dim)]) * float(radius)
    return ConvexBody(VPolytopeRep(V), True) if dim > 1 else vpolytope(V, centrally_symmetric=True)


def interval(half_width=1.0):
    return vpolytope([[-float(half_width)], [float(half_width)]], centrally_symmetric=True)


# ---------------------------------------------------------------------------
# conversions


def _vertices_to_hrep(V):
    n = V.shape[1]
    if n > EXACT_DIM_CAP:
        raise DimensionCapError(f"conversion capped at dim {EXACT_DIM_CAP}")
    if n == 1:
        lo, hi = float(V.min()), float(V.max())
        return HPolytopeRep(np.array([[1.0], [-1.0]]), np.array([hi, -lo]))
    hull = _hull(V)
    eqs = hull.equations            # a.x + c <= 0, |a| = 1
    normals, offs = eqs[:, :-1], -eqs[:, -1]
    if np.any(offs <= 0):
        raise OriginNotInteriorError("origin not strictly inside the hull")
    rows = _dedup_rows(np.column_stack([normals, offs]))
    return HPolytopeRep(rows[:, :-1], rows[:, -1])


def _hrep_to_vrep(h):
    n = h.dim
    if n > EXACT_DIM_CAP:
        raise DimensionCapError(f"conversion capped at dim {EXACT_DIM_CAP}")
    if n == 1:
        a, b = h.normals[:, 0], h.offsets
        ub = np.min(b[a > 0] / a[a > 0])
        lb = np.max(b[a < 0] / a[a < 0])
        return VPolytopeRep(np.array([[lb], [ub]]))
    # enumerate vertices through the polar: facets of conv{a_i/b_i} are the
    # vertices of the original body
    pts = h.normals / h.offsets[:, None]
    hull = _hull(pts)
    eqs = hull.equations
    normals, offs = eqs[:, :-1], -eqs[:, -1]
    if np.any(offs <= 0):
        raise UnboundedBodyError("H-polytope is unbounded or origin not interior")
    verts = _dedup_rows(normals / offs[:, None])
    return VPolytopeRep(verts)


def convert(body, target):
    """Return the same polytope carrying the requested representation ('H'/'V')."""
    if not body.is_polytope:
        raise NotPolytopeError("convert applies to polytopes only")
    target = target.upper()
    if target not in ("H", "V"):
        raise MinklabError("target must be 'H' or 'V'")
    rep = body.hrep if target == "H" else body.vrep
    out = ConvexBody(rep, body.centrally_symmetric, _validate=False)
    out._hrep, out._vrep = body._hrep, body._vrep
    if target == "H":
        out._hrep = rep
    else:
        out._vrep = rep
    return out


# ---------------------------------------------------------------------------
# polarity


def polar(body):
    """Polar body K° = {y : <x, y> <= 1 for all x in K}."""
    if body._polar_cache is not None:
        return body._polar_cache
    rep = body.rep
    if isinstance(rep, VPolytopeRep):
        out = hpolytope(rep.vertices, np.ones(rep.vertices.shape[0]),
                        centrally_symmetric=body.centrally_symmetric, _validate=False)
    elif isinstance(rep, HPolytopeRep):
        out = vpolytope(rep.normals / rep.offsets[:, None],
                        centrally_symmetric=body.centrally_symmetric)
    elif isinstance(rep, EllipsoidRep):
        out = ellipsoid(np.linalg.inv(rep.shape))
    elif isinstance(rep, PBallRep):
        out = _pball_polar(body)
    else:
        out = _oracle_polar(body)
    body._polar_cache = out
    out._polar_cache = body
    return out


def _pball_polar(body):
    rep = body.rep
    p, R, n = rep.p, rep.radius, rep.ndim
    q = _dual_exponent(p)

    def support_fn(u):          # h of the polar is the gauge of the source
        return _pnorm(u, p) / R

    def gauge_fn(x):
        return R * _pnorm(x, q)

    def gauge_grad_fn(x):
        return R * _pnorm_grad(x, q)

    def support_point_fn(u):
        return _pnorm_grad(u, p) / R

    def gauge_batch_fn(pts):
        ax = np.abs(np.asarray(pts, dtype=float))
        m = np.maximum(ax.max(axis=1), 1e-300)
        return R * m * np.sum((ax / m[:, None]) ** q, axis=1) ** (1.0 / q)

    return support_oracle(support_fn, n, gauge_fn, gauge_grad_fn,
                          support_point_fn, gauge_batch_fn,
                          centrally_symmetric=True, polar_source=body)


def _oracle_polar(body):
    rep = body.rep
    if rep.polar_source is not None:
        return rep.polar_source
    if rep.gauge_fn is None:
        raise MinklabError(
            "polar of a support oracle needs a closed-form gauge on the source")
    return support_oracle(rep.gauge_fn, rep.ndim, gauge_fn=rep.support_fn,
                          support_point_fn=None,
                          centrally_symmetric=body.centrally_symmetric,
                          polar_source=body)


# ---------------------------------------------------------------------------
# Minkowski algebra


def minkowski_sum(k1, k2):
    """Minkowski sum. Exact vertex hull for V-polytopes, support oracle otherwise."""
    if k1.dim != k2.dim:
        raise DimensionMismatchError("summands must share a dimension")
    sym = k1.centrally_symmetric and k2.centrally_symmetric
    if k1.is_polytope and k2.is_polytope:
        v1, v2 = k1.vrep.vertices, k2.vrep.vertices
        pts = (v1[:, None, :] + v2[None, :, :]).reshape(-1, k1.dim)
        return vpolytope(_dedup_rows(pts), centrally_symmetric=sym)

    def support_fn(u):
        return k1.support(u) + k2.support(u)

    def support_point_fn(u):
        return k1.support_point(u) + k2.support_point(u)

    return support_oracle(support_fn, k1.dim, support_point_fn=support_point_fn,
                          centrally_symmetric=sym)


def linear_image(body, matrix):
    """Image of the body under an invertible linear map."""
    M = _as_matrix(matrix, "matrix")
    n = body.dim
    if M.shape != (n, n):
        raise DimensionMismatchError(f"matrix must be {n}x{n}")
    scale = (np.linalg.norm(M, ord="fro") / math.sqrt(n)) ** n
    det = np.linalg.det(M)
    if abs(det) < 1e-12 * max(scale, 1e-30):
        raise DegenerateBodyError("matrix is numerically singular")
    sym = body.centrally_symmetric
    rep = body.rep
    if isinstance(rep, VPolytopeRep):
        return vpolytope(rep.vertices @ M.T, centrally_symmetric=sym)
    Minv = np.linalg.inv(M)
    if isinstance(rep, HPolytopeRep):
        return hpolytope(rep.normals @ Minv, rep.offsets,
                         centrally_symmetric=sym, _validate=False)
    if isinstance(rep, EllipsoidRep):
        return ellipsoid(Minv.T @ rep.shape @ Minv)
    if isinstance(rep, PBallRep) and _is_scalar_matrix(M):
        lam = abs(float(M[0, 0]))
        return pball(rep.p, rep.radius * lam, rep.ndim)
    return _oracle_linear_image(body, M, Minv, sym)


def _is_scalar_matrix(M, tol=1e-14):
    lam = M[0, 0]
    return np.abs(M - lam * np.eye(M.shape[0])).max() <= tol * max(1.0, abs(lam))


def _oracle_linear_image(body, M, Minv, sym):
    def support_fn(u):
        return body.support(M.T @ u)

    def gauge_fn(x):
        return body.gauge(Minv @ x)

    gauge_grad_fn = None
    if body.is_smooth:
        def gauge_grad_fn(x):
            return Minv.T @ body.gauge_grad(Minv @ x)

    def support_point_fn(u):
        return M @ body.support_point(M.T @ u)

    def gauge_batch_fn(pts):
        return body.gauge_batch(np.asarray(pts, dtype=float) @ Minv.T)

    return support_oracle(support_fn, body.dim, gauge_fn, gauge_grad_fn,
                          support_point_fn, gauge_batch_fn, centrally_symmetric=sym)


def scale_body(body, factor):
    if factor <= 0:
        raise MinklabError("scale factor must be positive")
    return linear_image(body, float(factor) * np.eye(body.dim))


def direct_product(p1, p2):
    """Cartesian product of two polytopes (H-representations stacked)."""
    if not (p1.is_polytope and p2.is_polytope):
        raise NotPolytopeError("direct_product requires polytope inputs")
    h1, h2 = p1.hrep, p2.hrep
    n1, n2 = h1.dim, h2.dim
    A = np.zeros((h1.normals.shape[0] + h2.normals.shape[0], n1 + n2))
    A[: h1.normals.shape[0], :n1] = h1.normals
    A[h1.normals.shape[0]:, n1:] = h2.normals
    b = np.concatenate([h1.offsets, h2.offsets])
    return hpolytope(A, b, centrally_symmetric=p1.centrally_symmetric
                     and p2.centrally_symmetric, _validate=False)


def free_sum(p1, p2):
    """Free sum conv(P1 x {0} ∪ {0} x P2); polar-dual to the direct product."""
    if not (p1.is_polytope and p2.is_polytope):
        raise NotPolytopeError("free_sum requires polytope inputs")
    v1, v2 = p1.vrep.vertices, p2.vrep.vertices
    n1, n2 = v1.shape[1], v2.shape[1]
    top = np.hstack([v1, np.zeros((v1.shape[0], n2))])
    bot = np.hstack([np.zeros((v2.shape[0], n1)), v2])
    return vpolytope(np.vstack([top, bot]),
                     centrally_symmetric=p1.centrally_symmetric and p2.centrally_symmetric)


def product_body(b1, b2):
    """Metric product A x B in stacked coordinates; exact for polytopes,
    support oracle otherwise (h(u, v) = h_A(u) + h_B(v))."""
    if b1.is_polytope and b2.is_polytope:
        return direct_product(b1, b2)
    n1, n2 = b1.dim, b2.dim
    sym = b1.centrally_symmetric and b2.centrally_symmetric

    def support_fn(u):
        return b1.support(u[:n1]) + b2.support(u[n1:])

    def gauge_fn(x):
        return max(b1.gauge(x[:n1]), b2.gauge(x[n1:]))

    def support_point_fn(u):
        return np.concatenate([b1.support_point(u[:n1]), b2.support_point(u[n1:])])

    def gauge_batch_fn(pts):
        pts = np.asarray(pts, dtype=float)
        return np.maximum(b1.gauge_batch(pts[:, :n1]), b2.gauge_batch(pts[:, n1:]))

    return support_oracle(support_fn, n1 + n2, gauge_fn, None,
                          support_point_fn, gauge_batch_fn, centrally_symmetric=sym)


def polydisc(radii):
    """Product of discs placed in the symplectic planes (q_j, p_j) of R^{2n}."""
    r = _as_vector(radii, name="radii")
    if np.any(r <= 0):
        raise MinklabError("disc radii must be positive")
    n = r.shape[0]

    def blocks(x):
        return np.stack([x[:n], x[n:]], axis=1)      # row j = (q_j, p_j)

    def support_fn(u):
        return float(np.sum(r * np.linalg.norm(blocks(u), axis=1)))

    def gauge_fn(x):
        return float(np.max(np.linalg.norm(blocks(x), axis=1) / r))

    def support_point_fn(u):
        B = blocks(u)
        norms = np.linalg.norm(B, axis=1)
        out = np.zeros((n, 2))
        mask = norms > 0
        out[mask] = (r[mask] / norms[mask])[:, None] * B[mask]
        return np.concatenate([out[:, 0], out[:, 1]])

    def gauge_batch_fn(pts):
        pts = np.asarray(pts, dtype=float)
        q, p = pts[:, :n], pts[:, n:]
        return np.max(np.sqrt(q ** 2 + p ** 2) / r, axis=1)

    return support_oracle(support_fn, 2 * n, gauge_fn, None, support_point_fn,
                          gauge_batch_fn, centrally_symmetric=True)


# ---------------------------------------------------------------------------
# Hanner polytopes


@dataclass(frozen=True)
class HannerTree:
    """Binary construction tree: leaves are intervals, internal nodes are
    direct products ('x') or free sums ('+')."""

    op: str                      # "leaf" | "product" | "sum"
    left: Optional["HannerTree"] = None
    right: Optional["HannerTree"] = None

    @property
    def leaves(self):
        if self.op == "leaf":
            return 1
        return self.left.leaves + self.right.leaves

    def __str__(self):
        if self.op == "leaf":
            return "I"
        glyph = "x" if self.op == "product" else "+"
        return f"({self.left} {glyph} {self.right})"


def parse_hanner_tree(text):
    """Parse strings like "(I x (I + I))"; leaves are 'I' or '·'."""
    tokens = []
    for ch in text:
        if ch.isspace():
            continue
        if ch in "Ii·*":
            tokens.append("I" if ch in "Ii·" else "x")
        elif ch in "xX×":
            tokens.append("x")
        elif ch in "+⊕":
            tokens.append("+")
        elif ch in "()":
            tokens.append(ch)
        else:
            raise MinklabError(f"unexpected character {ch!r} in tree {text!r}")
    pos = 0

    def primary():
        nonlocal pos
        if pos >= len(tokens):
            raise MinklabError(f"truncated tree expression {text!r}")
        tok = tokens[pos]
        if tok == "I":
            pos += 1
            return HannerTree("leaf")
        if tok != "(":
            raise MinklabError(f"expected leaf or '(' at token {pos} of {text!r}")
        pos += 1
        node = expr()
        if pos >= len(tokens) or tokens[pos] != ")":
            raise MinklabError(f"missing ')' at token {pos} of {text!r}")
        pos += 1
        return node

    def expr():
        # both operators bind equally and associate left
        nonlocal pos
        node = primary()
        while pos < len(tokens) and tokens[pos] in ("x", "+"):
            op = "product" if tokens[pos] == "x" else "sum"
            pos += 1
            node = HannerTree(op, node, primary())
        return node

    tree = expr()
    if pos != len(tokens):
        raise MinklabError(f"trailing tokens in tree expression {text!r}")
    return tree


def hanner(tree):
    """Build the Hanner polytope of a construction tree (or its string form)."""
    if isinstance(tree, str):
        tree = parse_hanner_tree(tree)
    if tree.op == "leaf":
        return interval(1.0)
    left, right = hanner(tree.left), hanner(tree.right)
    if tree.op == "product":
        return direct_product(left, right)
    return free_sum(left, right)


def enumerate_hanner_trees(leaves):
    """All labeled construction trees with the given number of leaves."""
    if leaves < 1:
        raise MinklabError("a tree needs at least one leaf")
    if leaves == 1:
        return [HannerTree("leaf")]
    out = []
    for k in range(1, leaves):
        for left in enumerate_hanner_trees(k):
            for right in enumerate_hanner_trees(leaves - k):
                for op in ("product", "sum"):
                    out.append(HannerTree(op, left, right))
    return out


# ---------------------------------------------------------------------------
# inradius and friends


def inradius_wrt(k, t):
    """Largest r with r*T ⊆ K."""
    return inradius_wrt_witness(k, t)[0]


def inradius_wrt_witness(k, t):
    """Inradius of K with respect to T plus a contact witness.

    Returns (r, info) where info holds the binding facet index (polytope K),
    the critical support direction, and the contact point r*T ∩ ∂K where the
    inflated copy first touches.
    """
    if k.dim != t.dim:
        raise DimensionMismatchError("bodies must share a dimension")
    if k.is_polytope:
        h = k.hrep
        vals = np.array([t.support(a) for a in h.normals])
        ratios = h.offsets / vals
        i = int(np.argmin(ratios))            # lowest index wins ties
        r = float(ratios[i])
        contact = r * t.support_point(h.normals[i])
        return r, {"facet_index": i, "direction": h.normals[i].copy(),
                   "contact": contact}
    if t.is_polytope:
        verts = t.vrep.vertices
        gv = np.array([k.gauge(v) for v in verts])
        j = int(np.argmax(gv))
        r = 1.0 / float(gv[j])
        return r, {"facet_index": None, "direction": None,
                   "contact": r * verts[j]}
    if isinstance(k.rep, EllipsoidRep) and isinstance(t.rep, EllipsoidRep):
        # inf_u h_K/h_T is the smallest generalized eigenvalue of the pencil
        # (Q_K^{-1}, Q_T^{-1})
        from scipy.linalg import eigh
        A = np.linalg.inv(k.rep.shape)
        B = np.linalg.inv(t.rep.shape)
        w, vecs = eigh(A, B)
        r = math.sqrt(max(float(w[0]), 0.0))
        u = vecs[:, 0]
        u = u / np.linalg.norm(u)
        return r, {"facet_index": None, "direction": u,
                   "contact": r * t.support_point(u)}
    # general smooth case: minimize h_K(u)/h_T(u) over directions
    def ratio(u):
        return k.support(u) / t.support(u)

    if k.dim == 2:
        th, val = _refine_angle(lambda a: ratio(np.array([math.cos(a), math.sin(a)])))
        u = np.array([math.cos(th), math.sin(th)])
    else:
        u, val = _refine_direction(ratio, k.dim)
    return float(val), {"facet_index": None, "direction": u,
                        "contact": float(val) * t.support_point(u)}


def euclidean_inradius(k):
    """Largest r with the Euclidean r-ball inside K."""
    if k.is_polytope:
        h = k.hrep
        return float(np.min(h.offsets / np.linalg.norm(h.normals, axis=1)))
    if isinstance(k.rep, EllipsoidRep):
        return 1.0 / math.sqrt(float(np.linalg.eigvalsh(k.rep.shape).max()))
    if isinstance(k.rep, PBallRep):
        return float(k.rep.radius)        # p >= 2: contact along the axes
    return inradius_wrt(k, ball(1.0, k.dim))


# ---------------------------------------------------------------------------
# random bodies and symmetry tests


def random_symmetric_polytope(dim, points, seed):
    """Hull of ±g_i for `points` standard Gaussian draws, rescaled so the
    Euclidean inradius is exactly 1. Deterministic in (dim, points, seed)."""
    if points < 1:
        raise MinklabError("need at least one generator point")
    for attempt in range(100):
        rng = np.random.default_rng([int(seed), int(dim), int(points), attempt])
        g = rng.standard_normal((points, dim))
        pts = np.vstack([g, -g])
        if np.linalg.matrix_rank(pts) < dim:
            continue
        try:
            body = vpolytope(pts, centrally_symmetric=True)
        except (DegenerateBodyError, OriginNotInteriorError):
            continue
        r = euclidean_inradius(body)
        if r < 1e-9:
            continue
        return vpolytope(body.vrep.vertices / r, centrally_symmetric=True)
    raise DegenerateBodyError(
        f"no full-dimensional symmetric polytope after 100 attempts (seed={seed})")


def quarter_turn_matrix(two_n):
    """The phase-space quarter turn (q, p) -> (-p, q)."""
    if two_n % 2 != 0:
        raise DimensionMismatchError("phase space dimension must be even")
    n = two_n // 2
    J = np.zeros((two_n, two_n))
    J[:n, n:] = -np.eye(n)
    J[n:, :n] = np.eye(n)
    return J


def is_quarter_symmetric(k, tol=1e-9):
    """Whether K is invariant under the quarter turn (q, p) -> (-p, q)."""
    J = quarter_turn_matrix(k.dim)
    if k.is_polytope:
        V = k.vrep.vertices
        return _point_set_equal(V, V @ J.T, tol)
    rng = np.random.default_rng(1729)
    dirs = rng.standard_normal((200, k.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    for u in dirs:
        a, b = k.support(u), k.support(J @ u)
        if abs(a - b) > tol * max(1.0, abs(a)):
            return False
    return True
