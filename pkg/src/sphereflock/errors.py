"""Exception types raised across the package."""


class SphereFlockError(Exception):
    pass


class AntipodalError(SphereFlockError, ValueError):
    """Rotation between antipodal points was requested."""


class DomainError(SphereFlockError, ValueError):
    """An argument lies outside the domain of a function (or is not finite)."""


class AdmissibilityError(SphereFlockError, ValueError):
    """Initial data off the sphere or with non-tangent velocities."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class BlowupError(SphereFlockError, RuntimeError):
    """The state left the neighbourhood of the constraint set or went non-finite."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class WindowError(SphereFlockError, ValueError):
    """A pair crossed the antipodal cutoff inside a finite-difference window."""
