"""Exception types shared across the package."""


class LadderWalkError(Exception):
    """Base class for all ladderwalk errors."""


class InvalidLaw(LadderWalkError):
    """A site law violates nonnegativity or normalization."""


class NotAdmissible(LadderWalkError):
    """A site law has a size-2 down-jump probability below the ellipticity floor."""


class DegenerateSystem(LadderWalkError):
    """The 2x2 boundary solve is singular, or a probability fell outside [0,1] slack."""


class NotConverged(LadderWalkError):
    """Depth doubling did not stabilize; carries the last two iterates."""

    def __init__(self, message, last=None, previous=None):
        super().__init__(message)
        self.last = last
        self.previous = previous


class DriftNegative(LadderWalkError):
    """The spectral shortcut requires nonnegative local drift."""


class SingularSystem(LadderWalkError):
    """The absorbing-chain linear solve left a residual above tolerance."""


class DegenerateDenominator(LadderWalkError):
    """An offspring-scalar denominator is too close to zero to be meaningful."""


class Diverging(LadderWalkError):
    """A level series shows no decay; the mean ladder time is infinite."""


class CapReached(LadderWalkError):
    """A simulated path hit the step cap before stopping."""


class MalformedPath(LadderWalkError):
    """A path contains an increment outside {-2, -1, 1, 2} or a bad start."""
