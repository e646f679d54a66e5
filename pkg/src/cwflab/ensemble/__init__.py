"""Brute-force trajectory ensembles used as an independent oracle.

The leapfrog inner loop is compiled with Cython when the extension is
available; otherwise an equivalent pure-Python kernel is used.  Set
``CWFLAB_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _leapfrog_py

if os.environ.get("CWFLAB_PURE_PYTHON", "") not in ("", "0"):
    _kernel = _leapfrog_py
    BACKEND = "python"
else:
    try:
        from . import _leapfrog as _kernel
        BACKEND = "cython"
    except ImportError:
        _kernel = _leapfrog_py
        BACKEND = "python"

leapfrog = _kernel.leapfrog

from .oracle import (  # noqa: E402
    DEFAULT_STEPS_PER_PERIOD,
    RadialHistogram,
    Trajectory,
    TrajectoryState,
    integrate_orbit,
    nominal_radial_period,
    periapsis_state,
    sample_density,
    time_of_flight,
)

__all__ = [
    "BACKEND",
    "DEFAULT_STEPS_PER_PERIOD",
    "RadialHistogram",
    "Trajectory",
    "TrajectoryState",
    "integrate_orbit",
    "leapfrog",
    "nominal_radial_period",
    "periapsis_state",
    "sample_density",
    "time_of_flight",
]
