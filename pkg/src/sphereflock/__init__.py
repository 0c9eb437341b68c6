"""Cucker-Smale flocking on the unit sphere.

The interaction transports velocities between agents with the rotation that
carries one position to the other along their great circle; antipodal pairs
do not interact.
"""

__version__ = "0.1.0"

from .dynamics import CommWeight, Ensemble, SimParams, acceleration, rhs  # noqa: E402
from .errors import (AdmissibilityError, AntipodalError, BlowupError,  # noqa: E402
                     DomainError, SphereFlockError, WindowError)
from .integrator import Trajectory, simulate, step_rk4  # noqa: E402

__all__ = [
    "AdmissibilityError", "AntipodalError", "BlowupError", "CommWeight", "DomainError",
    "Ensemble", "SimParams", "SphereFlockError", "Trajectory", "WindowError",
    "acceleration", "rhs", "simulate", "step_rk4",
]
