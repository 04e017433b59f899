"""Exception hierarchy.

Two families: ``ValidationError`` for inputs that cannot be processed
(CLI exit code 2) and ``NumericalError`` for tolerance breaches detected
while computing (CLI exit code 3).
"""


class HeunHKError(Exception):
    pass


class ValidationError(HeunHKError, ValueError):
    pass


class NumericalError(HeunHKError, ArithmeticError):
    pass


class DegenerateLattice(ValidationError):
    pass


class PoleProximity(ValidationError):
    pass


class AlphaOnLattice(ValidationError):
    pass


class SingularCollision(ValidationError):
    pass


class InsufficientCoefficients(ValidationError):
    pass


class NotApparent(ValidationError):
    pass


class PathThroughSingularity(ValidationError):
    pass


class DegenerateSelector(ValidationError):
    pass


class DenominatorZero(ValidationError):
    pass


class StencilThroughSingularity(ValidationError):
    pass


class NoConvergence(NumericalError):
    pass


class EmptyNullspace(NumericalError):
    pass


class NonConstantQ(NumericalError):
    pass


class BranchTrackingLost(NumericalError):
    pass


class RootConditioning(NumericalError):
    pass


class FitResidualTooLarge(NumericalError):
    pass


class BranchJump(NumericalError):
    pass


class DegreeDetectionFailed(NumericalError):
    pass
