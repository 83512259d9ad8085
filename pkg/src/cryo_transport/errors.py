"""Exception types shared across the package."""


class CryoTransportError(Exception):
    """Base class for all package errors."""


class AntipodalPoints(CryoTransportError, ValueError):
    """Viewing directions are (numerically) antipodal; the geodesic is not unique."""


class OrderExceeded(CryoTransportError, ValueError):
    """Requested exact polynomial order is above the configured cap."""


class DomainError(CryoTransportError, ValueError):
    """Argument outside the domain where a formula is defined."""


class ConvergenceFailure(CryoTransportError, RuntimeError):
    """The iterative eigensolver did not converge."""


class NoSpectralGap(CryoTransportError, RuntimeError):
    """Eigenvalues 3 and 4 of the transport matrix are not separated."""


class ShapeMismatch(CryoTransportError, ValueError):
    """Images are sampled on different grids."""


class InvalidConfig(CryoTransportError, ValueError):
    """An experiment configuration value violates a precondition."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
