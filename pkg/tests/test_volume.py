import math

import numpy as np
import pytest

from minklab import bodies as B
from minklab.errors import SymmetryRequiredError
from minklab.volume import (
    inequality_check,
    mahler_volume,
    polytope_volume,
    unit_ball_volume,
    volume,
)


def test_unit_ball_volume_closed_form():
    assert unit_ball_volume(1) == pytest.approx(2.0, abs=1e-15)
    assert unit_ball_volume(2) == pytest.approx(math.pi, abs=1e-15)
    assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-15)
    assert unit_ball_volume(4) == pytest.approx(math.pi ** 2 / 2.0, rel=1e-15)


def test_exact_polytope_volumes():
    assert volume(B.cube(3)).value == pytest.approx(8.0, abs=1e-12)
    assert volume(B.cross_polytope(3)).value == pytest.approx(8.0 / 6.0, rel=1e-12)
    assert volume(B.interval(2.0)).value == pytest.approx(4.0, abs=1e-14)
    res = volume(B.cube(2))
    assert res.method == "exact-fan"
    assert res.rel_error_bound == 0.0


def test_exact_smooth_volumes():
    assert volume(B.ball(2.0, 2)).value == pytest.approx(4.0 * math.pi, rel=1e-14)
    assert volume(B.ellipsoid_semiaxes(np.array([2.0, 0.5]))).value \
        == pytest.approx(math.pi, rel=1e-14)
    # Vol(B_p^n) = (2 Gamma(1+1/p))^n / Gamma(1+n/p)
    got = volume(B.pball(4, 1.0, 2)).value
    ref = (2.0 * math.gamma(1.25)) ** 2 / math.gamma(1.5)
    assert got == pytest.approx(ref, rel=1e-14)


def test_volume_scaling_power_law():
    body = B.random_symmetric_polytope(3, 9, seed=15)
    v1 = volume(body).value
    v2 = volume(B.scale_body(body, 1.7)).value
    assert v2 == pytest.approx(1.7 ** 3 * v1, rel=1e-9)


def test_linear_image_volume_determinant():
    body = B.random_symmetric_polytope(2, 8, seed=21)
    m = np.array([[1.2, 0.3], [-0.4, 0.9]])
    assert volume(B.linear_image(body, m)).value == pytest.approx(
        abs(np.linalg.det(m)) * volume(body).value, rel=1e-9)


def test_mc_volume_reproducible_and_bounded():
    body = B.cross_polytope(3)
    a = volume(body, method="mc", mc_samples=150_000, seed=9)
    b = volume(body, method="mc", mc_samples=150_000, seed=9)
    assert a.value == b.value
    assert a.method == "monte-carlo"
    assert a.n_samples == 150_000
    exact = polytope_volume(body)
    assert abs(a.value - exact) <= 3.0 * a.rel_error_bound * exact


def test_mc_confidence_bound_coverage():
    # the 95 percent bound should hold in most seeded trials
    body = B.random_symmetric_polytope(3, 8, seed=33)
    exact = polytope_volume(body)
    hits = 0
    trials = 20
    for s in range(trials):
        est = volume(body, method="mc", mc_samples=100_000, seed=s)
        if abs(est.value - exact) <= est.rel_error_bound * exact:
            hits += 1
    assert hits >= 17


def test_mc_seed_changes_estimate():
    body = B.cross_polytope(2)
    a = volume(body, method="mc", mc_samples=50_000, seed=0)
    b = volume(body, method="mc", mc_samples=50_000, seed=1)
    assert a.value != b.value


def test_mahler_cube_all_dims():
    for n in (2, 3, 4):
        res = mahler_volume(B.cube(n))
        target = 4.0 ** n / math.factorial(n)
        assert res.nu == pytest.approx(target, rel=1e-9)
        assert res.conjectured_min == pytest.approx(target, rel=1e-15)
        assert res.santalo_max == pytest.approx(unit_ball_volume(n) ** 2, rel=1e-15)


def test_mahler_hanner_trees_hit_floor():
    for n in (2, 3, 4):
        target = 4.0 ** n / math.factorial(n)
        for tree in B.enumerate_hanner_trees(n):
            res = mahler_volume(B.hanner(tree))
            assert res.nu == pytest.approx(target, rel=1e-9), str(tree)


def test_mahler_ball_hits_santalo_ceiling():
    res = mahler_volume(B.ball(1.0, 3))
    assert res.nu == pytest.approx(unit_ball_volume(3) ** 2, rel=1e-12)


def test_mahler_affine_invariance():
    body = B.random_symmetric_polytope(2, 8, seed=2)
    base = mahler_volume(body).nu
    rng = np.random.default_rng(5)
    for _ in range(5):
        m = rng.standard_normal((2, 2))
        # keep the map well conditioned
        u, s, vt = np.linalg.svd(m)
        s = np.clip(s, s.max() / 8.0, None)
        m = u @ np.diag(s) @ vt
        nu = mahler_volume(B.linear_image(body, m)).nu
        assert nu == pytest.approx(base, rel=1e-7)


def test_mahler_pball_closed_form():
    res = mahler_volume(B.pball(4, 1.0, 2))
    v_p = (2.0 * math.gamma(1.25)) ** 2 / math.gamma(1.5)
    v_q = (2.0 * math.gamma(1.75)) ** 2 / math.gamma(2.5)  # dual exponent 4/3
    assert res.nu == pytest.approx(v_p * v_q, rel=1e-12)


def test_mahler_accepts_nonsymmetric_but_checks_do_not():
    # nu itself only needs the origin interior; the symmetric-body
    # inequalities refuse to assert on a triangle
    tri = B.vpolytope(np.array([[1.0, -0.5], [-1.0, -0.5], [0.0, 1.0]]))
    res = mahler_volume(tri)
    assert res.nu > 0.0
    for kind in ("santalo", "mahler-lower", "kuperberg-lower"):
        with pytest.raises(SymmetryRequiredError):
            inequality_check(kind, tri)


def test_mahler_radius_invariant():
    # nu is scale free
    a = mahler_volume(B.ball(1.0, 2)).nu
    b = mahler_volume(B.ball(3.0, 2)).nu
    assert a == pytest.approx(b, rel=1e-12)


# ---------------------------------------------------------------------------
# inequality checks


def test_brunn_minkowski_check():
    k1 = B.random_symmetric_polytope(2, 7, seed=1)
    k2 = B.random_symmetric_polytope(2, 6, seed=2)
    rep = inequality_check("brunn-minkowski", k1, k2)
    assert rep.kind == "brunn-minkowski"
    assert rep.passed
    assert rep.slack >= -1e-7 * max(abs(rep.lhs), abs(rep.rhs))
    # lhs and rhs are the n-th roots
    assert rep.lhs == pytest.approx(
        volume(B.minkowski_sum(k1, k2)).value ** 0.5, rel=1e-9)


def test_rogers_shephard_check():
    body = B.random_symmetric_polytope(2, 8, seed=3)
    rep = inequality_check("rogers-shephard", body)
    assert rep.passed
    # symmetric case: difference body is 2K, ratio is 4 vs binom(4,2)=6
    assert rep.slack >= 0.0


def test_santalo_check():
    body = B.random_symmetric_polytope(2, 9, seed=4)
    rep = inequality_check("santalo", body)
    assert rep.passed and rep.asserted
    ball_case = inequality_check("santalo", B.ball(1.0, 2))
    assert ball_case.slack == pytest.approx(0.0, abs=1e-12)


def test_mahler_lower_assertion_split():
    poly2 = B.random_symmetric_polytope(2, 8, seed=5)
    rep2 = inequality_check("mahler-lower", poly2)
    assert rep2.asserted and rep2.passed
    poly3 = B.random_symmetric_polytope(3, 9, seed=6)
    rep3 = inequality_check("mahler-lower", poly3)
    assert not rep3.asserted
    assert rep3.n == 3


def test_kuperberg_check():
    body = B.random_symmetric_polytope(3, 9, seed=7)
    rep = inequality_check("kuperberg-lower", body)
    assert rep.asserted and rep.passed
    assert rep.rhs == pytest.approx(math.pi ** 3 / 6.0, rel=1e-12)


def test_inequality_check_rejects_unknown_kind():
    with pytest.raises(ValueError):
        inequality_check("isoperimetric", B.cube(2))
