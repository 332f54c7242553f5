"""Backend selection for the integrator kernels.

The compiled extension is used when it was built; otherwise, or when
``NLGAUGE_PURE_PYTHON=1`` is set, the numpy fallback is used.  ``BACKEND``
names the active one.
"""
import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

if _compiled is not None and not os.environ.get("NLGAUGE_PURE_PYTHON"):
    _active = _compiled
    BACKEND = "cython"
else:
    _active = _kernels_py
    BACKEND = "python"

rhs_assemble = _active.rhs_assemble
rk4_stage = _active.rk4_stage
rk4_finish = _active.rk4_finish
max_abs = _active.max_abs


def available_backends():
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
