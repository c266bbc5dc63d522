import math

import numpy as np
import pytest

from minklab import bodies as B
from minklab.capacities import (
    CapacityEstimate,
    LagrangianProduct,
    capacity_sandwich,
    complex_symmetric_bounds,
    ehz_lagrangian_product,
    viterbo_ratio,
)
from minklab.errors import DimensionMismatchError, SymmetryRequiredError
from minklab.volume import mahler_volume


def test_cube_cross_product_capacity_is_four():
    for n in (2, 3, 4):
        est = ehz_lagrangian_product(LagrangianProduct(B.cube(n), B.cross_polytope(n)))
        assert est.value == pytest.approx(4.0, rel=1e-9)
        assert est.lower <= est.value <= est.upper
        assert est.n == n


def test_ball_pair_capacity():
    est = ehz_lagrangian_product(B.ball(2.0, 2), B.ball(3.0, 2))
    assert est.value == pytest.approx(24.0, rel=1e-12)


def test_capacity_conformality():
    k = B.random_symmetric_polytope(2, 7, seed=11)
    t = B.random_symmetric_polytope(2, 6, seed=12)
    base = ehz_lagrangian_product(k, t).value
    for lam in (0.5, 1.0, 2.0, 3.0):
        for mu in (0.5, 1.0, 2.0, 3.0):
            scaled = ehz_lagrangian_product(
                B.scale_body(k, lam), B.scale_body(t, mu)).value
            assert scaled == pytest.approx(lam * mu * base, rel=1e-9)


def test_capacity_monotone_in_first_factor():
    t = B.random_symmetric_polytope(2, 6, seed=30)
    outer = B.random_symmetric_polytope(2, 9, seed=31)
    # a symmetric subset: hull of a sub-family of vertex pairs
    v = outer.vrep.vertices
    keep = v[np.lexsort(v.T)][: v.shape[0] // 2]
    inner = B.vpolytope(np.vstack([keep, -keep]), centrally_symmetric=True)
    c_in = ehz_lagrangian_product(inner, t).value
    c_out = ehz_lagrangian_product(outer, t).value
    assert c_in <= c_out + 1e-9


def test_capacity_requires_symmetry():
    tri = B.vpolytope(np.array([[1.0, -0.5], [-1.0, -0.5], [0.0, 1.0]]))
    with pytest.raises(SymmetryRequiredError):
        ehz_lagrangian_product(tri, B.ball(1.0, 2))


def test_lagrangian_product_dim_mismatch():
    with pytest.raises(DimensionMismatchError):
        LagrangianProduct(B.cube(2), B.cross_polytope(3))


def test_capacity_witness_fields():
    est = ehz_lagrangian_product(B.cube(2), B.cross_polytope(2))
    w = est.witnesses
    assert w["inradius"] == pytest.approx(1.0, abs=1e-12)
    assert "q0" in w and "direction" in w


def test_viterbo_ratio_cube_is_one():
    assert viterbo_ratio(LagrangianProduct(B.cube(2), B.cross_polytope(2))) \
        == pytest.approx(1.0, abs=1e-9)
    assert viterbo_ratio(LagrangianProduct(B.cube(3), B.cross_polytope(3))) \
        == pytest.approx(1.0, abs=1e-9)


def test_viterbo_ratio_ball_pair_value():
    got = viterbo_ratio(LagrangianProduct(B.ball(1.0, 2), B.ball(1.0, 2)))
    assert got == pytest.approx(4.0 / (math.pi * math.sqrt(2.0)), rel=1e-12)


def test_viterbo_ratio_scale_invariant():
    k = B.random_symmetric_polytope(2, 8, seed=14)
    t = B.random_symmetric_polytope(2, 7, seed=15)
    r1 = viterbo_ratio(LagrangianProduct(k, t))
    r2 = viterbo_ratio(LagrangianProduct(B.scale_body(k, 3.0), B.scale_body(t, 0.5)))
    assert r1 == pytest.approx(r2, rel=1e-9)


def test_viterbo_mahler_boolean_equivalence_sweep():
    for s in range(12):
        body = B.random_symmetric_polytope(2, 8, seed=500 + s)
        nu = mahler_volume(body).nu
        ratio = viterbo_ratio(LagrangianProduct(body, B.polar(body)))
        band = 1e-9
        assert (ratio <= 1.0 + band) == (nu >= 8.0 / (1.0 + band) ** 2), (s, nu, ratio)


def test_complex_symmetric_bounds_ball():
    est = complex_symmetric_bounds(B.ball(1.0, 4))
    assert est.lower == pytest.approx(math.pi, abs=1e-14)
    assert est.upper == pytest.approx(4.0, abs=1e-14)
    assert est.upper / est.lower == 4.0 / math.pi
    # the disc capacity pi r^2 lies inside
    assert est.lower <= math.pi <= est.upper


def test_complex_symmetric_bounds_cube():
    est = complex_symmetric_bounds(B.cube(4))
    assert est.upper / est.lower == 4.0 / math.pi
    assert est.lower == pytest.approx(math.pi, rel=1e-12)


def test_complex_symmetric_bounds_scaling():
    a = complex_symmetric_bounds(B.ball(1.0, 4))
    b = complex_symmetric_bounds(B.ball(2.0, 4))
    assert b.lower == pytest.approx(4.0 * a.lower, rel=1e-12)
    assert b.upper == pytest.approx(4.0 * a.upper, rel=1e-12)


def test_complex_symmetric_bounds_rejects_plain_symmetry():
    stretched = B.ellipsoid_semiaxes(np.array([2.0, 1.0, 1.0, 1.0]))
    with pytest.raises(SymmetryRequiredError):
        complex_symmetric_bounds(stretched)


def test_complex_symmetric_bounds_rejects_odd_dim():
    with pytest.raises(DimensionMismatchError):
        complex_symmetric_bounds(B.ball(1.0, 3))


def test_sandwich_ball():
    est = capacity_sandwich(B.ball(1.0, 4))
    assert est.lower == pytest.approx(math.pi, abs=1e-12)
    assert est.upper == pytest.approx(math.pi, rel=1e-9)


def test_sandwich_cube():
    est = capacity_sandwich(B.cube(4))
    assert est.lower == pytest.approx(math.pi, abs=1e-12)
    assert est.upper == pytest.approx(2.0 * math.pi, rel=1e-9)


def test_sandwich_polydisc():
    est = capacity_sandwich(B.polydisc([1.0, 2.0]))
    assert est.lower == pytest.approx(math.pi, rel=1e-9)
    assert est.upper == pytest.approx(math.pi, rel=1e-4)


def test_sandwich_ellipsoid_projections():
    est = capacity_sandwich(B.ellipsoid_semiaxes(np.array([1.0, 2.0, 3.0, 4.0])))
    # symplectic planes pair coordinates (0,2) and (1,3)
    assert est.lower == pytest.approx(math.pi, rel=1e-12)
    assert est.upper == pytest.approx(math.pi * 9.0, rel=1e-9)


def test_sandwich_contains_product_capacity():
    prod = B.direct_product(B.cube(2), B.cross_polytope(2))
    est = capacity_sandwich(prod)
    value = ehz_lagrangian_product(B.cube(2), B.cross_polytope(2)).value
    assert est.lower - 1e-9 <= value <= est.upper + 1e-9


def test_sandwich_lemma_interval_consistency():
    # for quarter symmetric bodies both intervals surround the same capacity
    for body in (B.ball(1.0, 4), B.cube(4)):
        lemma = complex_symmetric_bounds(body)
        broad = capacity_sandwich(body)
        lo = max(lemma.lower, broad.lower)
        hi = min(lemma.upper, broad.upper)
        assert lo <= hi + 1e-9


def test_capacity_estimate_validation():
    with pytest.raises(ValueError):
        CapacityEstimate(lower=2.0, upper=1.0, method="x", n=2)
    with pytest.raises(ValueError):
        CapacityEstimate(lower=1.0, upper=2.0, method="x", n=2, value=5.0)
    est = CapacityEstimate(lower=1.0, upper=2.0, method="x", n=2)
    assert est.gap_ratio == pytest.approx(2.0)
    row = est.csv_row()
    assert row[0] == "x"
    assert len(row) == 7


def test_estimates_positive_and_finite(planar_bodies):
    for body in planar_bodies.values():
        est = ehz_lagrangian_product(body, B.ball(1.0, 2))
        assert est.value > 0.0 and math.isfinite(est.value)
        assert est.lower > 0.0 and math.isfinite(est.upper)
