"""Exception types raised by the solvers and helpers."""


class MPJacobiError(Exception):
    """Base class for all errors raised by this package."""


class PrecisionOverflow(MPJacobiError):
    """A value overflowed to infinity when rounding to a narrower format."""


class NoConvergence(MPJacobiError):
    """An iterative solver exhausted its sweep budget."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class RankDeficient(MPJacobiError):
    """A column norm vanished where full column rank was required."""


class PivotAlreadyOrthogonal(MPJacobiError):
    """The one-sided rotation was asked to orthogonalize orthogonal columns."""


class DegenerateInput(MPJacobiError):
    """Input has zero norm where a relative quantity was requested."""
