"""Exception hierarchy for the gmc package."""


class GMCError(Exception):
    """Base class for all gmc errors."""


class ValidationError(GMCError, ValueError):
    """Input failed validation."""


class NotPointed(ValidationError):
    pass


class NotFullDim(ValidationError):
    pass


class DimensionUnsupported(ValidationError):
    pass


class UnsupportedScheme(ValidationError):
    pass


class DirectionOutsideCone(ValidationError):
    pass


class InvalidMeasure(ValidationError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class EmptySubset(ValidationError):
    pass


class InvalidConfig(ValidationError):
    pass


class InvalidPlan(ValidationError):
    pass


class NoConvergence(GMCError, RuntimeError):
    pass


class InfeasibleEval(GMCError, RuntimeError):
    pass


class ProbeFailed(GMCError, RuntimeError):
    pass


class MaxIterations(GMCError, RuntimeError):
    """Raised by a strict solve that did not converge; carries the best report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class StageFailed(GMCError, RuntimeError):
    def __init__(self, message, stage=None, report=None):
        super().__init__(message)
        self.stage = stage
        self.report = report
