"""Exception hierarchy shared by every package.

Each class carries the process exit code the CLI reports for it.
"""


class BiorthoError(Exception):
    exit_code = 1


# ============================================================================
# SOLVER FAILURES (exit 2)
# ============================================================================

class SolverError(BiorthoError):
    exit_code = 2


class NonConvergence(SolverError):
    """Quadrature error estimate did not reach the requested tolerance."""


class NoConvergence(SolverError):
    """Iterative solver exhausted its iteration budget."""


class BracketFailure(SolverError):
    """No sign change found after bounded bracket expansion."""


class DegenerateDerivative(SolverError):
    """Newton derivative collapsed, typically near a critical point of a map."""


# ============================================================================
# VALIDATION FAILURES (exit 1)
# ============================================================================

class ValidationError(BiorthoError):
    exit_code = 1


class NonPositive(ValidationError):
    """A determinant that must be positive was not, at working precision."""


class PrecisionExhausted(ValidationError):
    pass


class InvalidSolution(ValidationError):
    pass


class Unclassifiable(ValidationError):
    pass


# ============================================================================
# DOMAIN AND CONFIGURATION ERRORS (exit 64)
# ============================================================================

class DomainError(BiorthoError, ValueError):
    exit_code = 64


class IrrationalTheta(DomainError):
    pass


class DegeneratePoint(DomainError):
    pass


class OnBranchCut(DomainError):
    pass


class OutOfRange(DomainError):
    pass


class InvalidConfiguration(DomainError):
    pass


class ConfigError(BiorthoError, ValueError):
    exit_code = 64
