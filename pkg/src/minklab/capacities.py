"""Symplectic capacity values and interval bounds for convex phase-space bodies.

The exact route is the width formula for Lagrangian products of centrally
symmetric bodies, c = 4 inrad_{T polar}(K).  Everything else is bracketed:
the inscribed-ball lower bound against coordinate-cylinder upper bounds, or
the quarter-symmetry lemma interval [pi r^2, 4 r^2].
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import bodies as B
from .errors import DimensionMismatchError, SymmetryRequiredError
from .volume import volume


@dataclass(frozen=True)
class LagrangianProduct:
    """Product K x T with K in position space and T in momentum space."""

    K: B.ConvexBody
    T: B.ConvexBody

    def __post_init__(self):
        if self.K.dim != self.T.dim:
            raise DimensionMismatchError(
                f"K and T must share a dimension, got {self.K.dim} and {self.T.dim}"
            )

    @property
    def n(self) -> int:
        return self.K.dim


@dataclass(frozen=True)
class CapacityEstimate:
    lower: float
    upper: float
    method: str                      # "ehz-formula" | "sandwich" | "lemma-iK"
    n: int
    value: Optional[float] = None
    witnesses: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper + 1e-12):
            raise ValueError(f"invalid capacity interval [{self.lower}, {self.upper}]")
        if self.value is not None and not (
            self.lower - 1e-12 <= self.value <= self.upper + 1e-12
        ):
            raise ValueError(
                f"capacity value {self.value} outside [{self.lower}, {self.upper}]"
            )

    @property
    def gap_ratio(self) -> float:
        if self.lower == 0.0:
            return math.inf
        return self.upper / self.lower

    def csv_row(self):
        val = "" if self.value is None else repr(self.value)
        summary = ";".join(f"{k}={_short(v)}" for k, v in sorted(self.witnesses.items()))
        return [self.method, str(self.n), repr(self.lower), val, repr(self.upper),
                repr(self.gap_ratio), summary]


def _short(v):
    if isinstance(v, np.ndarray):
        return "(" + ",".join(f"{x:.6g}" for x in v) + ")"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _as_product(P, T=None) -> LagrangianProduct:
    if isinstance(P, LagrangianProduct):
        if T is not None:
            raise TypeError("pass either a LagrangianProduct or two bodies")
        return P
    if T is None:
        raise TypeError("need a momentum body T")
    return LagrangianProduct(P, T)


def ehz_lagrangian_product(P, T=None) -> CapacityEstimate:
    """EHZ capacity of K x T for centrally symmetric K, T: 4 inrad_{T polar}(K).

    The witness records the contact configuration: the point where the
    largest gauge copy of T polar touches the boundary of K, which is the
    bounce point of the minimizing 2-periodic trajectory.
    """
    prod = _as_product(P, T)
    if not prod.K.centrally_symmetric or not prod.T.centrally_symmetric:
        raise SymmetryRequiredError(
            "the width formula holds for centrally symmetric K and T"
        )
    tp = B.polar(prod.T)
    r, info = B.inradius_wrt_witness(prod.K, tp)
    value = 4.0 * r
    wit = {"inradius": r, "q0": info["contact"]}
    if "facet_index" in info:
        wit["facet_index"] = info["facet_index"]
    if "direction" in info:
        wit["direction"] = info["direction"]
    return CapacityEstimate(lower=value, upper=value, method="ehz-formula",
                            n=prod.n, value=value, witnesses=wit)


def viterbo_ratio(P, T=None) -> float:
    """c_EHZ(K x T) / (n! Vol K Vol T)^(1/n); at most 1 is the prediction."""
    prod = _as_product(P, T)
    n = prod.n
    c = ehz_lagrangian_product(prod).value
    vk = volume(prod.K).value
    vt = volume(prod.T).value
    bound = (math.factorial(n) * vk * vt) ** (1.0 / n)
    return c / bound


def complex_symmetric_bounds(K: B.ConvexBody) -> CapacityEstimate:
    """Capacity interval [pi r^2, 4 r^2] for bodies invariant under the
    quarter turn (q, p) -> (-p, q); the ratio of the endpoints is 4/pi."""
    if K.dim % 2 != 0:
        raise DimensionMismatchError("phase-space body must have even dimension")
    if not B.is_quarter_symmetric(K):
        raise SymmetryRequiredError("body is not quarter-turn symmetric")
    r, info = B.inradius_wrt_witness(K, B.ball(1.0, K.dim))
    lower = math.pi * r * r
    upper = 4.0 * r * r
    return CapacityEstimate(lower=lower, upper=upper, method="lemma-iK",
                            n=K.dim // 2,
                            witnesses={"inradius": r, "contact": info["contact"]})


def _enclosing_disc_radius(pts: np.ndarray) -> float:
    """Exact smallest enclosing disc radius over a planar point set (Welzl)."""
    pts = np.asarray(pts, dtype=float)
    idx = np.arange(len(pts))
    np.random.default_rng(20349).shuffle(idx)
    pts = pts[idx]

    def circle_two(a, b):
        c = (a + b) / 2.0
        return c, float(np.linalg.norm(a - c))

    def circle_three(a, b, c):
        # circumcircle; degenerate triples fall back to the widest pair
        d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
        if abs(d) < 1e-14:
            pairs = [circle_two(a, b), circle_two(a, c), circle_two(b, c)]
            return max(pairs, key=lambda t: t[1])
        ux = ((a @ a) * (b[1] - c[1]) + (b @ b) * (c[1] - a[1]) + (c @ c) * (a[1] - b[1])) / d
        uy = ((a @ a) * (c[0] - b[0]) + (b @ b) * (a[0] - c[0]) + (c @ c) * (b[0] - a[0])) / d
        center = np.array([ux, uy])
        return center, float(np.linalg.norm(a - center))

    def inside(circ, p):
        center, rad = circ
        return np.linalg.norm(p - center) <= rad * (1.0 + 1e-12) + 1e-15

    circ = (pts[0].copy(), 0.0)
    for i in range(1, len(pts)):
        if inside(circ, pts[i]):
            continue
        circ = (pts[i].copy(), 0.0)
        for j in range(i):
            if inside(circ, pts[j]):
                continue
            circ = circle_two(pts[i], pts[j])
            for k in range(j):
                if inside(circ, pts[k]):
                    continue
                circ = circle_three(pts[i], pts[j], pts[k])
    return circ[1]


def _projection_disc_radius(K: B.ConvexBody, j: int, n: int) -> float:
    """Smallest enclosing disc of the projection of K onto the (q_j, p_j) plane."""
    rep = K.rep
    if K.is_polytope:
        pts = K.vrep.vertices[:, (j, n + j)]
        return _enclosing_disc_radius(pts)
    if isinstance(rep, B.EllipsoidRep):
        qinv = np.linalg.inv(rep.shape)
        sub = qinv[np.ix_((j, n + j), (j, n + j))]
        return math.sqrt(float(np.linalg.eigvalsh(sub)[-1]))
    if isinstance(rep, B.PBallRep):
        # the shadow of the p-ball on a coordinate plane is the planar p-ball
        return rep.radius * 2.0 ** (0.5 - 1.0 / rep.p)
    angles = np.linspace(0.0, 2.0 * math.pi, 720, endpoint=False)
    pts = np.empty((len(angles), 2))
    for i, a in enumerate(angles):
        u = np.zeros(K.dim)
        u[j] = math.cos(a)
        u[n + j] = math.sin(a)
        sp = K.support_point(u)
        pts[i] = sp[(j, n + j),]
    return _enclosing_disc_radius(pts)


def capacity_sandwich(K: B.ConvexBody) -> CapacityEstimate:
    """Bracket the capacity linearly: inscribed ball below, the best
    coordinate-plane cylinder above."""
    if K.dim % 2 != 0:
        raise DimensionMismatchError("phase-space body must have even dimension")
    n = K.dim // 2
    rin = B.euclidean_inradius(K)
    lower = math.pi * rin * rin
    best = math.inf
    best_plane = -1
    for j in range(n):
        rad = _projection_disc_radius(K, j, n)
        if rad < best:
            best = rad
            best_plane = j
    upper = math.pi * best * best
    return CapacityEstimate(lower=lower, upper=upper, method="sandwich", n=n,
                            witnesses={"inradius": rin, "plane": best_plane,
                                       "cyl_radius": best})
