"""Exception hierarchy.

Everything the toolkit raises derives from :class:`ConicToriError`.  Failures
of a numerical check (as opposed to bad input) derive from
:class:`NumericalFailure`; the CLI maps those to exit code 2.
"""


class ConicToriError(Exception):
    pass


class NumericalFailure(ConicToriError):
    pass


class CheckFailed(NumericalFailure):
    """A residual exceeded its tolerance."""

    def __init__(self, check, value, tol):
        self.check = check
        self.value = value
        self.tol = tol
        super().__init__(f"check {check!r} failed: residual {value:.3e} > tol {tol:.1e}")


class SingularLocus(NumericalFailure):
    pass


class QuadratureDivergence(NumericalFailure):
    pass


class DegenerateMetric(NumericalFailure):
    pass


class LeftDomain(NumericalFailure):
    pass


class NearSingularLocus(NumericalFailure):
    pass


class SamplingInsufficient(NumericalFailure):
    pass


class BoundaryZero(NumericalFailure):
    def __init__(self, coordinate, value=None):
        self.coordinate = coordinate
        msg = f"coordinate {coordinate!r} vanishes on the boundary circle"
        if value is not None:
            msg += f" (min modulus {value:.3e})"
        super().__init__(msg)


class WindingUnresolved(NumericalFailure):
    """A phase increment between adjacent samples exceeded pi/2."""


class NonTransverse(NumericalFailure):
    pass


class FrameDegenerate(NumericalFailure):
    pass


class PointOnBoundary(ConicToriError):
    pass


class UnexpectedZero(NumericalFailure):
    pass


class BranchJump(NumericalFailure):
    pass


class TooCloseToC(NumericalFailure):
    pass
