"""Exception hierarchy.

Numerical failures derive from :class:`NumericalError` so the CLI can map them
to a single exit code.
"""


class RMFError(Exception):
    """Base class for all library errors."""


class NumericalError(RMFError):
    pass


class DimensionMismatchError(RMFError, ValueError):
    def __init__(self, dim_a, dim_b):
        super().__init__(f"dimension mismatch: {dim_a} vs {dim_b}")
        self.dims = (dim_a, dim_b)


class DomainError(RMFError, ValueError):
    pass


class UnsupportedOrderError(RMFError, ValueError):
    pass


class SingularCurveError(NumericalError):
    """Speed fell below the singular guard."""

    def __init__(self, s, speed):
        super().__init__(f"curve is not regular at s={s:.12g} (speed {speed:.3g})")
        self.s = s
        self.speed = speed


class FrameDegeneracyError(NumericalError):
    def __init__(self, s, gram):
        super().__init__(
            f"Frenet frame degenerate at s={s:.12g} (Gram determinant {gram:.3g})"
        )
        self.s = s
        self.gram = gram


class DegenerateStepError(NumericalError):
    def __init__(self, index, s):
        super().__init__(f"coincident consecutive samples at index {index} (s={s:.12g})")
        self.index = index
        self.s = s


class AccuracyError(NumericalError):
    pass


class InsufficientDataError(NumericalError):
    pass


class SingularityError(NumericalError):
    """A divisor curvature vanishes (or changes sign) on the grid."""

    def __init__(self, message, locations):
        super().__init__(message)
        self.locations = list(locations)


class FitDegeneracyError(NumericalError):
    pass


class NotConstantError(NumericalError):
    def __init__(self, variation):
        super().__init__(
            f"free coefficient is not constant (relative variation {variation:.3g})"
        )
        self.variation = variation


class GridMismatchError(RMFError, ValueError):
    pass


class ZeroVectorError(NumericalError):
    pass
