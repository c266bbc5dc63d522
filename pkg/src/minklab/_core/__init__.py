"""Kernel backend selection.

The closed-orbit search spends nearly all its time inside a penalized
simplex descent over boundary polygons.  That kernel exists twice: a
compiled Cython extension (``_speedups``) and a pure-Python reference
(``reference``) with identical semantics.  The compiled one is preferred
when the build produced it; ``MINKLAB_BACKEND=pure`` or
``MINKLAB_BACKEND=compiled`` forces the choice at import time, and
:func:`use_backend` switches it afterwards (tests and benchmarks do this).
"""

import os

from . import reference
from .reference import CALLABLE, MAXDOT, PNORM, QUAD

try:
    from . import _speedups
except ImportError:
    _speedups = None

HAVE_COMPILED = _speedups is not None

_env = os.environ.get("MINKLAB_BACKEND", "").strip().lower()
if _env == "pure":
    _active = reference
elif _env == "compiled":
    if _speedups is None:
        raise ImportError(
            "MINKLAB_BACKEND=compiled but the compiled kernel is not available; "
            "reinstall with a working C toolchain or unset MINKLAB_BACKEND"
        )
    _active = _speedups
elif _env:
    raise ImportError(f"MINKLAB_BACKEND must be 'pure' or 'compiled', got {_env!r}")
else:
    _active = _speedups if _speedups is not None else reference


def backend_name() -> str:
    return "compiled" if _active is _speedups and _speedups is not None else "pure"


def use_backend(name: str) -> None:
    """Switch the active kernel; raises if the compiled one was not built."""
    global _active
    if name == "pure":
        _active = reference
    elif name == "compiled":
        if _speedups is None:
            raise RuntimeError("compiled kernel not available in this install")
        _active = _speedups
    else:
        raise ValueError(f"unknown backend {name!r}")


def polygon_search_2d(gk_enc, ht_enc, gd_enc, m, theta0, mu, tol, maxiter):
    return _active.polygon_search_2d(gk_enc, ht_enc, gd_enc, m, theta0, mu, tol, maxiter)
