"""
Exception hierarchy for the toolkit
Each error carries the exit code the command line reports for it
"""

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2
EXIT_VALIDATION = 3


class PovmDomainError(Exception):
    """Base class for all toolkit errors"""

    exit_code = EXIT_INPUT


# Input errors

class DimensionMismatch(PovmDomainError):
    """Operands of incompatible order or length"""


class NotHermitian(PovmDomainError):
    """Matrix differs from its adjoint by more than the tolerance"""


class NotOrthonormal(PovmDomainError):
    """Basis vectors are not orthonormal"""


class AngleOutOfRange(PovmDomainError):
    """Pure-state angle outside its allowed interval"""


class OutsideBlochBall(PovmDomainError):
    """Bloch vector longer than one"""


class BadRank(PovmDomainError):
    """Requested rank outside 1..d"""


class TooFewPoints(PovmDomainError):
    """Not enough probability points to span an affine set"""


class WrongLength(PovmDomainError):
    """Vector of unexpected length"""


class InvalidState(PovmDomainError):
    """Matrix is not a density matrix (trace, Hermiticity or positivity)"""


class InvalidCounts(PovmDomainError):
    """Count record with negative entries or a wrong total"""


# Numerical errors

class NoConvergence(PovmDomainError):
    """Iteration budget exhausted"""

    exit_code = EXIT_NUMERICAL
