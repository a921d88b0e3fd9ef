"""Exception types raised by the package."""


class KerrHybridError(Exception):
    """Base class for all package errors."""


class NonPhysicalState(KerrHybridError, ValueError):
    """Shape parameters violate positivity or the uncertainty bound."""


class NonPhysicalMoments(NonPhysicalState):
    """Moments do not correspond to any Gaussian state."""


class DegenerateCenter(KerrHybridError, ValueError):
    """The state center is zero, so its phase is undefined."""


class IntegrationFailure(KerrHybridError, RuntimeError):
    """The ODE integrator stopped before reaching the requested time."""

    def __init__(self, message, last_time=None):
        super().__init__(message)
        self.last_time = last_time


class TruncationOverflow(KerrHybridError, RuntimeError):
    """Population reached the edge of the truncated Fock basis."""


class NonHermitianInput(KerrHybridError, ValueError):
    pass


class NegativeSpectrum(KerrHybridError, ValueError):
    pass


class InstabilityBound(KerrHybridError, ValueError):
    """Steady-state formulas past the parametric-instability threshold."""


class BranchAmbiguity(KerrHybridError, ValueError):
    """Several physical branches exist and the caller must choose one.

    The candidate results are kept in ``branches`` (a dict keyed by label).
    """

    def __init__(self, message, branches):
        super().__init__(message)
        self.branches = branches


class ConfigError(KerrHybridError, ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
