"""Backend dispatch for the hot numerical kernels.

The JIT backend is the default.  Set ``NCIDOA_NO_NUMBA=1`` to force the
pure-numpy implementation (it is also used automatically when numba is
not importable).  Both expose the same functions and the same iteration
semantics; ``benchmarks/bench_kernels.py`` compares them.
"""

import os

_flag = os.environ.get("NCIDOA_NO_NUMBA", "").strip().lower()
_want_numba = _flag not in ("1", "true", "yes", "on")

if _want_numba:
    try:
        from . import _numba_backend as _impl

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - depends on environment
        from . import _numpy_backend as _impl

        BACKEND = "numpy"
else:
    from . import _numpy_backend as _impl

    BACKEND = "numpy"

GAUSSIAN_CODE = 0
UNIFORM_CODE = 1

fc_grid = _impl.fc_grid
profile_theta = _impl.profile_theta
pav_nonincreasing = _impl.pav_nonincreasing
project_monotone_box = _impl.project_monotone_box


def backend_name() -> str:
    return BACKEND
