"""Exception types shared across the package."""


class LifespanLabError(Exception):
    """Base class for all package-specific errors."""


class InvalidProblemError(LifespanLabError):
    """A problem description violates a structural requirement."""


class InvalidDataError(LifespanLabError):
    """Initial data violates support, sign, or smoothness requirements."""


class HyperbolicityError(LifespanLabError):
    """The equation left the hyperbolic regime at some evaluated state."""


class ConfigError(LifespanLabError):
    """A run configuration is malformed or inconsistent."""


class OracleError(LifespanLabError):
    """The closed-form lifespan oracle cannot handle the requested setup."""


class ResolutionError(LifespanLabError):
    """A grid is too coarse for the requested quadrature or comparison."""


class CertificateError(LifespanLabError):
    """A certificate could not be built or failed an internal consistency check."""


class DivergenceError(LifespanLabError):
    """A closed-form comparison solution was evaluated at or past its blow-up point."""


class InsufficientDataError(LifespanLabError):
    """Too few usable data points for the requested fit or comparison."""
