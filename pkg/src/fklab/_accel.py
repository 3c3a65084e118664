"""Numba shim and kernel-path selection.

Hot kernels in ``_kernels.py`` come in two flavors: numba ``@njit`` loop
versions and vectorized pure-numpy fallbacks.  Setting the environment
variable ``FKLAB_NUMBA=0`` forces the numpy path; otherwise numba is used
whenever it imports.  ``benchmarks/bench_kernels.py`` times both.
"""

import os


def _numba_wanted() -> bool:
    flag = os.environ.get("FKLAB_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


USE_NUMBA = False
if _numba_wanted():
    try:
        from numba import njit  # noqa: F401

        USE_NUMBA = True
    except ImportError:
        pass

if not USE_NUMBA:

    def njit(*args, **kwargs):  # noqa: D103  (passthrough decorator)
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap
