"""Exception types raised across the package."""


class TJStabError(Exception):
    """Base class for all package errors."""


class DomainError(TJStabError, ValueError):
    """Input lies outside the admissible parameter domain."""


class ShapeError(TJStabError, ValueError):
    """Array shapes do not match the declared grid."""


class ConstraintError(TJStabError, ValueError):
    """A variation violates a hard constraint beyond tolerance."""


class NumericalError(TJStabError, ArithmeticError):
    """A numerical procedure is too ill-conditioned to be trusted."""


class ConfigError(TJStabError, ValueError):
    """Malformed or inconsistent run configuration."""
