"""Volumes, Mahler products, and the classical volumetric inequalities.

Exact volumes come from an origin-centered fan over the triangulated hull
facets (the origin is interior by construction, so every cone is proper).
Ellipsoids and p-balls have closed forms.  Everything else falls back to
chunked Monte Carlo rejection sampling in the bounding box with a
counter-based generator, so estimates are reproducible and chunk order
cannot change the stream.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull

from .bodies import (
    ConvexBody,
    EllipsoidRep,
    HPolytopeRep,
    OracleRep,
    PBallRep,
    VPolytopeRep,
    linear_image,
    minkowski_sum,
    polar,
)
from .errors import NotPolytopeError, SymmetryRequiredError

MC_DEFAULT_SAMPLES = 200_000
_MC_CHUNK = 65_536


@dataclass(frozen=True)
class VolumeResult:
    value: float
    method: str                  # "exact-fan" | "closed-form" | "monte-carlo"
    rel_error_bound: float = 0.0  # 95% bound for monte-carlo, 0 otherwise
    n_samples: int = 0

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class MahlerResult:
    nu: float
    vol_body: float
    vol_polar: float
    dim: int
    conjectured_min: float       # 4^n / n!, the symmetric floor
    santalo_max: float           # kappa_n^2
    rel_error_bound: float = 0.0


@dataclass(frozen=True)
class CheckReport:
    kind: str
    n: int
    lhs: float
    rhs: float
    slack: float                 # >= 0 means the inequality holds
    passed: bool
    asserted: bool
    seed: int = 0
    detail: dict = field(default_factory=dict)


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def _pball_volume(p: float, radius: float, n: int) -> float:
    return (2.0 * math.gamma(1.0 + 1.0 / p)) ** n / math.gamma(1.0 + n / p) * radius ** n


def polytope_volume(body: ConvexBody) -> float:
    """Exact volume: sum of |det| / n! over origin cones of the facet simplices."""
    if not body.is_polytope:
        raise NotPolytopeError("exact fan volume needs a polytope")
    verts = body.vrep.vertices
    n = verts.shape[1]
    if n == 1:
        return float(verts.max() - verts.min())
    hull = ConvexHull(verts)
    total = 0.0
    for simplex in hull.simplices:
        total += abs(np.linalg.det(verts[simplex]))
    return total / math.factorial(n)


def _mc_volume(body: ConvexBody, n_samples: int, seed: int) -> VolumeResult:
    lo, hi = body.bounding_box()
    span = hi - lo
    box_vol = float(np.prod(span))
    hits = 0
    done = 0
    chunk_idx = 0
    while done < n_samples:
        take = min(_MC_CHUNK, n_samples - done)
        gen = np.random.Generator(np.random.Philox(key=[seed, chunk_idx]))
        pts = lo + gen.random((take, body.dim)) * span
        g = body.gauge_batch(pts)
        hits += int(np.count_nonzero(g <= 1.0))
        done += take
        chunk_idx += 1
    frac = hits / n_samples
    value = frac * box_vol
    if hits == 0:
        rel = math.inf
    else:
        rel = 1.96 * math.sqrt((1.0 - frac) / (frac * n_samples))
    return VolumeResult(value, "monte-carlo", rel, n_samples)


def volume(body: ConvexBody, method: str = "auto",
           mc_samples: int = MC_DEFAULT_SAMPLES, seed: int = 0) -> VolumeResult:
    """Volume of a body; method 'auto' picks the best exact route available."""
    rep = body.rep
    if method not in ("auto", "exact", "mc"):
        raise ValueError(f"unknown volume method {method!r}")
    if method == "mc":
        return _mc_volume(body, mc_samples, seed)
    if isinstance(rep, (HPolytopeRep, VPolytopeRep)):
        return VolumeResult(polytope_volume(body), "exact-fan")
    if isinstance(rep, EllipsoidRep):
        det = float(np.linalg.det(rep.shape))
        return VolumeResult(unit_ball_volume(body.dim) / math.sqrt(det), "closed-form")
    if isinstance(rep, PBallRep):
        return VolumeResult(_pball_volume(rep.p, rep.radius, rep.ndim), "closed-form")
    if method == "exact":
        raise NotPolytopeError("no exact volume route for a support oracle")
    return _mc_volume(body, mc_samples, seed)


def _polar_volume(body: ConvexBody, mc_samples: int, seed: int) -> VolumeResult:
    rep = body.rep
    if isinstance(rep, PBallRep):
        # polar of the p-ball is the dual-exponent ball of radius 1/R
        q = rep.p / (rep.p - 1.0)
        return VolumeResult(_pball_volume(q, 1.0 / rep.radius, rep.ndim), "closed-form")
    return volume(polar(body), mc_samples=mc_samples, seed=seed + 1)


def mahler_volume(body: ConvexBody, mc_samples: int = MC_DEFAULT_SAMPLES,
                  seed: int = 0) -> MahlerResult:
    """Volume product nu(K) = Vol(K) * Vol(K polar), with the reference levels."""
    n = body.dim
    vk = volume(body, mc_samples=mc_samples, seed=seed)
    vp = _polar_volume(body, mc_samples, seed)
    nu = vk.value * vp.value
    rel = vk.rel_error_bound + vp.rel_error_bound
    return MahlerResult(
        nu=nu,
        vol_body=vk.value,
        vol_polar=vp.value,
        dim=n,
        conjectured_min=4.0 ** n / math.factorial(n),
        santalo_max=unit_ball_volume(n) ** 2,
        rel_error_bound=rel,
    )


def _exactness(body: ConvexBody) -> bool:
    return not isinstance(body.rep, OracleRep)


def _tol_for(lhs: float, rhs: float, exact: bool, mc_rel: float) -> float:
    scale = max(abs(lhs), abs(rhs), 1.0)
    if exact:
        return 1e-9 * scale
    return (1e-9 + mc_rel) * scale


def inequality_check(kind: str, body: ConvexBody, other: Optional[ConvexBody] = None,
                     seed: int = 0, mc_samples: int = MC_DEFAULT_SAMPLES) -> CheckReport:
    """Evaluate one classical volumetric inequality on concrete bodies.

    slack >= 0 means the inequality holds; `asserted` says whether a violation
    is a genuine failure (theorem) or a reportable conjecture datum.
    """
    n = body.dim
    if kind == "brunn-minkowski":
        if other is None:
            raise ValueError("brunn-minkowski needs two bodies")
        va = volume(body, mc_samples=mc_samples, seed=seed)
        vb = volume(other, mc_samples=mc_samples, seed=seed + 1)
        vs = volume(minkowski_sum(body, other), mc_samples=mc_samples, seed=seed + 2)
        lhs = vs.value ** (1.0 / n)
        rhs = va.value ** (1.0 / n) + vb.value ** (1.0 / n)
        exact = vs.method != "monte-carlo"
        mc_rel = va.rel_error_bound + vb.rel_error_bound + vs.rel_error_bound
        slack = lhs - rhs
        tol = _tol_for(lhs, rhs, exact, mc_rel)
        return CheckReport(kind, n, lhs, rhs, slack, slack >= -tol, True, seed,
                           {"vol_sum": vs.value})
    if kind == "rogers-shephard":
        va = volume(body, mc_samples=mc_samples, seed=seed)
        diff = minkowski_sum(body, linear_image(body, -np.eye(n)))
        vd = volume(diff, mc_samples=mc_samples, seed=seed + 1)
        lhs = math.comb(2 * n, n) * va.value
        rhs = vd.value
        exact = vd.method != "monte-carlo"
        slack = lhs - rhs
        tol = _tol_for(lhs, rhs, exact, va.rel_error_bound + vd.rel_error_bound)
        return CheckReport(kind, n, lhs, rhs, slack, slack >= -tol, True, seed,
                           {"vol_diff_body": vd.value})
    if kind in ("santalo", "mahler-lower", "kuperberg-lower"):
        if not body.centrally_symmetric:
            raise SymmetryRequiredError(f"{kind} is stated for centrally symmetric bodies")
        res = mahler_volume(body, mc_samples=mc_samples, seed=seed)
        exact = res.rel_error_bound == 0.0
        if kind == "santalo":
            lhs, rhs, asserted = res.santalo_max, res.nu, True
        elif kind == "mahler-lower":
            lhs, rhs, asserted = res.nu, res.conjectured_min, (n == 2)
        else:
            lhs, rhs, asserted = res.nu, math.pi ** n / math.factorial(n), True
        slack = lhs - rhs
        tol = _tol_for(lhs, rhs, exact, res.rel_error_bound)
        return CheckReport(kind, n, lhs, rhs, slack, slack >= -tol, asserted, seed,
                           {"nu": res.nu})
    raise ValueError(f"unknown inequality kind {kind!r}")
