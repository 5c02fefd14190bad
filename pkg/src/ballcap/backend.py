"""Numba/NumPy backend selection for the hot numerical kernels.

The environment variable ``BALLCAP_BACKEND`` controls which implementation
of the inner loops is used:

* ``auto`` (default) -- use numba when it is importable, else numpy.
* ``numba``          -- require numba, raise if unavailable.
* ``numpy``          -- force the pure-numpy fallback path.

Both paths implement identical algorithms; see ``benchmarks/bench_backends.py``
for a timing comparison.
"""

import os

from . import _maxscan, _qp, _series

_CHOICE = os.environ.get("BALLCAP_BACKEND", "auto").strip().lower()
if _CHOICE not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"BALLCAP_BACKEND must be 'auto', 'numba' or 'numpy', got {_CHOICE!r}"
    )

USE_NUMBA = False
if _CHOICE in ("auto", "numba"):
    try:
        import numba  # noqa: F401

        USE_NUMBA = True
    except ImportError:
        if _CHOICE == "numba":
            raise
        USE_NUMBA = False

BACKEND = "numba" if USE_NUMBA else "numpy"


def _identity_jit(func):
    return func


if USE_NUMBA:
    import numba

    def _jit(func):
        return numba.njit(fastmath=False)(func)

else:
    _jit = _identity_jit

project_simplex, solve_simplex_qp = _qp.build(_jit)
series_eval = _series.build(_jit)

if USE_NUMBA:
    maximal_scan = _maxscan.build_numba(_jit)
else:
    maximal_scan = _maxscan.scan_numpy


def set_threads(n):
    """Set the worker count for parallel sections (numba only, no-op on numpy)."""
    if USE_NUMBA and n and n > 0:
        import numba

        numba.set_num_threads(int(n))
