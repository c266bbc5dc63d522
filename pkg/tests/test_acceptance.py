"""Acceptance gate: ten end-to-end checks, one test per criterion.

Each test prints one `ACCEPTANCE <k> <pass|fail>` line with the measured
numbers and asserts the stated tolerance and wall-clock budget.  The budgets
assume the compiled kernel; the pure fallback passes every numerical check
but is roughly an order of magnitude slower on criteria 5 and 7.
"""

import math
import time

import numpy as np
import pytest

from minklab import bodies as B
from minklab.billiards import PhasePoint, flow, reflect, shortest_closed
from minklab.capacities import (
    LagrangianProduct,
    complex_symmetric_bounds,
    ehz_lagrangian_product,
    viterbo_ratio,
)
from minklab.experiments import run_experiment
from minklab.volume import mahler_volume, unit_ball_volume


def _report(num, ok, detail):
    print(f"ACCEPTANCE {num} {'pass' if ok else 'fail'}: {detail}")
    return ok


def test_criterion_01_cube_cross_capacity():
    t0 = time.perf_counter()
    worst = 0.0
    for n in (2, 3, 4):
        value = ehz_lagrangian_product(
            LagrangianProduct(B.cube(n), B.cross_polytope(n))).value
        worst = max(worst, abs(value - 4.0) / 4.0)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 1.0
    assert _report(1, ok,
                   f"ehz(cube x cross) n=2,3,4 rel err {worst:.2e} "
                   f"(tol 1e-9), {elapsed:.2f}s (budget 1s)")


def test_criterion_02_mahler_minimizers():
    t0 = time.perf_counter()
    worst = 0.0
    count = 0
    for n in (2, 3, 4):
        target = 4.0 ** n / math.factorial(n)
        for body in [B.cube(n)] + [B.hanner(t) for t in B.enumerate_hanner_trees(n)]:
            res = mahler_volume(body)
            assert res.rel_error_bound == 0.0  # exact volume path
            worst = max(worst, abs(res.nu - target) / target)
            count += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 5.0
    assert _report(2, ok,
                   f"{count} minimizer bodies, worst rel err {worst:.2e} "
                   f"(tol 1e-9), {elapsed:.2f}s (budget 5s)")


def test_criterion_03_planar_mahler_sweep():
    t0 = time.perf_counter()
    rep = run_experiment({"suite": "mahler-sweep", "dims": [2], "cells": 500,
                          "points": 8, "seed": 0})
    elapsed = time.perf_counter() - t0
    i_slack = rep.columns.index("slack_mahler")
    min_slack = min(row[i_slack] for row in rep.rows)
    ok = not rep.failures and min_slack >= -1e-9 and elapsed < 30.0
    assert _report(3, ok,
                   f"500 polygons, min slack {min_slack:.3e} (floor -1e-9), "
                   f"{elapsed:.1f}s (budget 30s)")


def test_criterion_04_kuperberg_santalo_bracket():
    t0 = time.perf_counter()
    rep = run_experiment({"suite": "mahler-sweep", "dims": [2, 3], "cells": 200,
                          "points": 9, "seed": 1})
    elapsed = time.perf_counter() - t0
    i_k = rep.columns.index("slack_kuperberg")
    i_s = rep.columns.index("slack_santalo")
    min_k = min(row[i_k] for row in rep.rows)
    min_s = min(row[i_s] for row in rep.rows)
    ok = (not rep.failures and min_k >= -1e-9 and min_s >= -1e-9
          and len(rep.rows) == 400 and elapsed < 120.0)
    assert _report(4, ok,
                   f"200 polytopes per dim at n=2,3; kuperberg slack "
                   f">= {min_k:.3e}, santalo slack >= {min_s:.3e}, "
                   f"{elapsed:.1f}s (budget 120s)")


def test_criterion_05_billiard_capacity_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    for s in range(50):
        if s % 2 == 0:
            K = B.ellipsoid_semiaxes(np.array([1.0 + 0.03 * s, 1.0]))
        else:
            K = B.pball(4, 1.0 + 0.02 * s, 2)
        if s % 3 == 0:
            T = B.pball(6, 1.0 + 0.015 * s, 2)
        elif s % 3 == 1:
            T = B.ellipsoid_semiaxes(np.array([1.0, 1.0 + 0.025 * s]))
        else:
            T = B.ball(1.0 + 0.01 * s, 2)
        closed_form = 4.0 * B.inradius_wrt(K, B.polar(T))
        got = shortest_closed(K, T, seed=s).length
        worst = max(worst, abs(got - closed_form))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-5 and elapsed < 120.0
    assert _report(5, ok,
                   f"50 smooth pairs, worst |variational - 4 inrad| "
                   f"{worst:.2e} (tol 1e-5), {elapsed:.1f}s (budget 120s)")


def test_criterion_06_flow_and_reflection():
    t0 = time.perf_counter()
    disc = B.ball(1.0, 2)
    traj = flow(disc, disc, PhasePoint(np.zeros(2), np.array([1.0, 0.0])))
    flow_ok = (traj.closed and traj.closure_residual <= 1e-6
               and abs(traj.length - 4.0) <= 1e-6 and traj.bounce_count == 2)

    rng = np.random.default_rng(123)
    worst = 0.0
    checked = 0
    while checked < 1000:
        p = rng.standard_normal(2)
        p /= np.linalg.norm(p)
        n_q = rng.standard_normal(2)
        n_q /= np.linalg.norm(n_q)
        if float(p @ n_q) > -1e-3:
            continue
        mirror = p - 2.0 * float(p @ n_q) * n_q
        worst = max(worst, float(np.max(np.abs(reflect(p, n_q, disc) - mirror))))
        checked += 1
    elapsed = time.perf_counter() - t0
    ok = flow_ok and worst <= 1e-10 and elapsed < 5.0
    assert _report(6, ok,
                   f"disc orbit closes (residual {traj.closure_residual:.1e}, "
                   f"length {traj.length:.12f}); specular worst dev "
                   f"{worst:.2e} over 1000 pairs (tol 1e-10), "
                   f"{elapsed:.2f}s (budget 5s)")


def test_criterion_07_xi_bounds_and_superadditivity():
    t0 = time.perf_counter()
    rep = run_experiment({"suite": "xi-bounds", "cells": 100, "pairs": 50,
                          "points": 8, "starts": 32, "seed": 0})
    elapsed = time.perf_counter() - t0
    i_kind = rep.columns.index("kind")
    i_ok = rep.columns.index("ok")
    i_slack = rep.columns.index("slack_super")
    singles = [r for r in rep.rows if r[i_kind] == "single"]
    pairs = [r for r in rep.rows if r[i_kind] == "pair"]
    min_super = min(r[i_slack] for r in pairs)
    ok = (not rep.failures and len(singles) == 100 and len(pairs) == 50
          and all(r[i_ok] for r in rep.rows)
          and min_super >= -1e-5 and elapsed < 300.0)
    assert _report(7, ok,
                   f"100 bodies inside [4 inrad, 2(n+1) inrad] at 1e-6; "
                   f"50 pairs superadditive, min slack {min_super:.3e} "
                   f"(floor -1e-5), {elapsed:.0f}s (budget 300s)")


def test_criterion_08_viterbo_mahler_cross_path():
    t0 = time.perf_counter()
    agree_all = True
    cube_dev = 0.0
    floor_cells = 0
    for seed in (0, 3):
        rep = run_experiment({"suite": "viterbo-sweep", "dims": [2],
                              "cells": 50, "points": 8, "seed": seed})
        agree_all = agree_all and not rep.failures
        i_agree = rep.columns.index("agree")
        i_body = rep.columns.index("body")
        i_ratio = rep.columns.index("ratio")
        i_nu = rep.columns.index("nu")
        agree_all = agree_all and all(row[i_agree] for row in rep.rows)
        for row in rep.rows:
            if row[i_body] == "cube":
                cube_dev = max(cube_dev, abs(row[i_ratio] - 1.0))
            if abs(row[i_nu] - 8.0) < 1e-9:
                floor_cells += 1
    elapsed = time.perf_counter() - t0
    ok = agree_all and cube_dev <= 1e-9 and floor_cells >= 1
    assert _report(8, ok,
                   f"booleans agree on 100 rows ({floor_cells} on the Mahler "
                   f"floor); cube ratio dev {cube_dev:.2e} (tol 1e-9), "
                   f"{elapsed:.1f}s")


def test_criterion_09_lemma_sandwich():
    ratio_target = 4.0 / math.pi
    ball_est = complex_symmetric_bounds(B.ball(1.0, 4))
    cube_est = complex_symmetric_bounds(B.cube(4))
    ball_exact = ball_est.upper / ball_est.lower == ratio_target
    cube_exact = cube_est.upper / cube_est.lower == ratio_target
    contains_pi = ball_est.lower <= math.pi <= ball_est.upper
    ok = ball_exact and cube_exact and contains_pi
    assert _report(9, ok,
                   f"ball interval [{ball_est.lower:.6f}, {ball_est.upper:.6f}] "
                   f"contains pi r_in^2; upper/lower == 4/pi exactly for ball "
                   f"and cube")


def test_criterion_10_report_only_constants():
    # the asymptotic constant A, the constant C of the volume-radius bound,
    # and Mahler at n >= 3 stay out of every failure list
    rep_xi = run_experiment({"suite": "xi-bounds", "cells": 3, "pairs": 1,
                             "points": 8, "starts": 8, "seed": 0})
    rep_m3 = run_experiment({"suite": "mahler-sweep", "dims": [3], "cells": 10,
                             "points": 9, "seed": 2})
    i_assert = rep_m3.columns.index("mahler_asserted")
    vol_ratio_reported = "vol_ratio" in rep_xi.columns
    n3_report_only = all(row[i_assert] is False for row in rep_m3.rows)
    no_constant_failures = not any(
        "vol_ratio" in f or "mahler" in f
        for f in rep_xi.failures + rep_m3.failures)
    ok = vol_ratio_reported and n3_report_only and no_constant_failures
    assert _report(10, ok,
                   "vol_ratio and n>=3 Mahler slack emitted as report-only "
                   "columns, excluded from assertions")
