"""Hot-kernel dispatch.

Selects the numba or numpy implementation at import time based on
``BOHMFLOW_BACKEND`` (see :mod:`bohmflow.backend`).  Both implementations
share coefficient tables and panel layouts, so swapping backends changes
speed, not results.
"""

from ..backend import BACKEND, USE_NUMBA
from .common import (  # noqa: F401
    AI_ZERO,
    AIP_ZERO,
    FAMILY_FINITE_AIRY,
    FAMILY_GAUSSIAN,
    FAMILY_GENERALIZED_GAUSSIAN,
    FAMILY_IDEAL_AIRY,
    PERES_HALF_WIDTH,
    PERES_RAMP,
    TRAJ_ESCAPED,
    TRAJ_NODE,
    TRAJ_OK,
)

if USE_NUMBA:
    from .numba_impl import (  # noqa: F401
        airy_many,
        peres_moments_point,
        peres_moments_row,
        rk4_closed_form,
        velocity_double_sum,
        velocity_double_sum_many,
    )
else:
    from .numpy_impl import (  # noqa: F401
        airy_many,
        peres_moments_point,
        peres_moments_row,
        rk4_closed_form,
        velocity_double_sum,
        velocity_double_sum_many,
    )

__all__ = [
    "BACKEND",
    "USE_NUMBA",
    "airy_many",
    "peres_moments_point",
    "peres_moments_row",
    "rk4_closed_form",
    "velocity_double_sum",
    "velocity_double_sum_many",
]
