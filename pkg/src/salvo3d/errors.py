"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A scenario or graph fails its schema or structural constraints."""


class ParameterError(ValueError):
    """A numeric parameter violates its admissible range."""


class CertificationError(ValueError):
    """Configured gains violate the sufficient consensus conditions."""


class DomainError(ArithmeticError):
    """A state evaluation hit a kinematic singularity or guard."""


class DegenerateGeometryError(DomainError):
    """Allocation is infeasible: both constraint coefficients vanished
    while a nonzero command was requested."""
