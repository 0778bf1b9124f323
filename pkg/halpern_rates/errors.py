"""Exception hierarchy."""


class HalpernError(Exception):
    """Base class for all package errors."""


class ContractViolationError(HalpernError, ValueError):
    """Inputs break an operation contract (dimensions, bad fixtures)."""


class InvalidPointError(HalpernError, ValueError):
    """A direction vector is not a unit vector."""


class DomainError(HalpernError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class DegenerateTriangleError(DomainError):
    """A vertex coincides with one of the other two."""


class InfeasibleTriangleError(DomainError):
    """Side lengths admit no comparison triangle."""


class UnsupportedAnalysisError(HalpernError):
    """The requested quantity is not known analytically."""


class NonConvergenceError(HalpernError, RuntimeError):
    """An iterative solver hit its iteration cap."""


class ExhaustedError(HalpernError):
    """The available data ended before the searched property was found."""


class ConfigurationError(HalpernError, ValueError):
    """An experiment configuration is invalid or infeasible."""
