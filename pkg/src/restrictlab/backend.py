"""Kernel backend selection.

Hot inner loops (box scans, level-set search, residue grids, packed
convolution) exist twice: a numba ``@njit`` version and a pure-numpy
version.  The active backend is chosen once at import time from the
environment variable ``RESTRICTLAB_BACKEND``:

    auto   use numba when importable (default)
    numba  require numba, fail loudly if missing
    numpy  force the pure-numpy path

Both paths produce identical results; ``benchmarks/bench_backends.py``
times them against each other.
"""

from __future__ import annotations

import os

_VALID = ("auto", "numba", "numpy")


def _resolve() -> tuple[str, bool]:
    choice = os.environ.get("RESTRICTLAB_BACKEND", "auto").strip().lower()
    if choice not in _VALID:
        raise ValueError(
            f"RESTRICTLAB_BACKEND={choice!r}; expected one of {_VALID}"
        )
    if choice == "numpy":
        return "numpy", False
    try:
        import numba  # noqa: F401

        has_numba = True
    except ImportError:
        has_numba = False
    if choice == "numba" and not has_numba:
        raise ImportError("RESTRICTLAB_BACKEND=numba but numba is not importable")
    return ("numba" if has_numba else "numpy"), has_numba


ACTIVE_BACKEND, HAS_NUMBA = _resolve()


def using_numba() -> bool:
    return ACTIVE_BACKEND == "numba"
