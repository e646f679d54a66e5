"""Exception hierarchy.

Every user-facing failure derives from :class:`CwfError`; the CLI maps these
to exit code 2 and prints the message.
"""


class CwfError(Exception):
    """Base class for all recoverable, user-attributable errors."""


class DomainError(CwfError, ValueError):
    """An argument lies outside the domain of the operation."""


class UnboundStateError(DomainError):
    def __init__(self, detail=""):
        msg = "unbound state"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class DegenerateAnnulusError(DomainError):
    def __init__(self, detail=""):
        msg = "degenerate annulus"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class SingularBoundaryError(DomainError):
    def __init__(self, detail=""):
        msg = "singular boundary"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class DensitySingularityError(DomainError):
    def __init__(self, detail=""):
        msg = "density singularity"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class UnmappedParametersError(DomainError):
    def __init__(self, detail=""):
        msg = "unmapped parameters"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class EnergySurfaceError(DomainError):
    """Initial condition does not lie on the requested energy surface."""


class QuadratureError(CwfError, RuntimeError):
    """Adaptive quadrature failed to reach its tolerance."""

    def __init__(self, achieved, tol):
        self.achieved = achieved
        self.tol = tol
        super().__init__(
            f"quadrature failure: error estimate {achieved:.3e} exceeds target {tol:.3e}"
        )


class ConfigError(CwfError):
    """Malformed scenario configuration."""
