import math
import subprocess
import sys

import numpy as np
import pytest

from minklab import _core
from minklab._core import reference


def _square_enc():
    return (reference.MAXDOT, np.array([[1.0, 0.0], [-1.0, 0.0],
                                        [0.0, 1.0], [0.0, -1.0]]), 0.0, 1.0, None)


def _disc_enc():
    return (reference.QUAD, np.eye(2), 0.0, 1.0, None)


def _l1_enc():
    return (reference.PNORM, None, 1.0, 1.0, None)


def test_reference_nelder_mead_quadratic():
    f = lambda x: (x[0] - 1.0) ** 2 + 2.0 * (x[1] + 0.5) ** 2
    x, fx, converged, nev = reference.nelder_mead(f, [0.0, 0.0], 0.5, 1e-12, 500)
    assert converged
    assert abs(x[0] - 1.0) < 1e-6 and abs(x[1] + 0.5) < 1e-6
    assert fx < 1e-10


def test_reference_search_disc_two_bounce():
    enc = _disc_enc()
    # difference body K - K of the unit disc is the radius 2 disc
    diff = (reference.QUAD, np.eye(2), 0.0, 0.5, None)
    length, phi, thetas, converged, nev, gap = reference.polygon_search_2d(
        enc, enc, diff, 2, [0.0, math.pi], 40.0, 1e-10, 400)
    assert converged
    assert length == pytest.approx(4.0, abs=1e-8)
    assert phi == pytest.approx(1.0, abs=1e-9)
    assert gap > 1e-3


def test_backend_name_reports_active():
    assert _core.backend_name() in ("pure", "compiled")


def test_use_backend_round_trip():
    original = _core.backend_name()
    _core.use_backend("pure")
    assert _core.backend_name() == "pure"
    if _core.HAVE_COMPILED:
        _core.use_backend("compiled")
        assert _core.backend_name() == "compiled"
    _core.use_backend(original)


def test_use_backend_rejects_unknown():
    with pytest.raises(ValueError):
        _core.use_backend("gpu")


def test_env_var_validation_subprocess():
    bad = subprocess.run(
        [sys.executable, "-c", "import minklab"],
        env={"PATH": "/usr/bin:/bin", "MINKLAB_BACKEND": "bogus"},
        capture_output=True, text=True)
    assert bad.returncode != 0
    assert "MINKLAB_BACKEND" in bad.stderr

    pure = subprocess.run(
        [sys.executable, "-c",
         "from minklab import _core; print(_core.backend_name())"],
        env={"PATH": "/usr/bin:/bin", "MINKLAB_BACKEND": "pure"},
        capture_output=True, text=True)
    assert pure.returncode == 0
    assert pure.stdout.strip() == "pure"


needs_compiled = pytest.mark.skipif(
    not _core.HAVE_COMPILED, reason="compiled kernel not built")


@needs_compiled
def test_backends_bit_identical_on_mixed_cases():
    from minklab._core import _speedups
    cases = []
    for m in (2, 3):
        for gk in (_disc_enc(), _square_enc(), _l1_enc()):
            for ht in (_disc_enc(), _l1_enc()):
                cases.append((gk, ht, gk, m))
    rng = np.random.default_rng(8)
    for gk, ht, gd, m in cases:
        theta0 = list(rng.uniform(0.0, 2.0 * math.pi, m))
        gd_arg = gd if m == 2 else None
        args = (gk, ht, gd_arg, m, list(theta0), 25.0, 1e-9, 600)
        ref = reference.polygon_search_2d(*args)
        fast = _speedups.polygon_search_2d(*args)
        assert fast[0] == ref[0]          # length
        assert fast[1] == ref[1]          # constraint value
        assert list(fast[2]) == list(ref[2])
        assert fast[3] == ref[3]
        assert fast[4] == ref[4]          # same evaluation count
        assert fast[5] == ref[5]


@needs_compiled
def test_backend_switch_preserves_results():
    from minklab import bodies as B
    from minklab.billiards import shortest_closed
    K = B.random_symmetric_polytope(2, 7, seed=50)
    T = B.ball(1.0, 2)
    _core.use_backend("compiled")
    try:
        a = shortest_closed(K, T, starts=8, seed=4)
    finally:
        _core.use_backend("pure")
    try:
        b = shortest_closed(K, T, starts=8, seed=4)
    finally:
        _core.use_backend("compiled" if _core.HAVE_COMPILED else "pure")
    assert a.length == pytest.approx(b.length, rel=1e-9)
