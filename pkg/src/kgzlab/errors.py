"""Exception hierarchy shared by all kgzlab modules."""


class KGZError(Exception):
    """Base class for every error raised by kgzlab."""


class GridError(KGZError, ValueError):
    """Invalid grid parameters."""


class GridMismatch(KGZError, ValueError):
    """Fields bound to different grids were combined."""


class MeanNotZero(KGZError, ValueError):
    """A field that must have zero mean (for an inverse Laplacian) does not."""


class FrequencyOutOfRange(KGZError, ValueError):
    """Standing-wave frequency outside the admissible range."""


class NoConvergence(KGZError, RuntimeError):
    """A Newton-type iteration failed to converge."""


class EigensolveFailure(KGZError, RuntimeError):
    """The dense eigensolver did not return a usable spectrum."""


class BlowUp(KGZError, RuntimeError):
    """A field norm left the representable range during time stepping."""

    def __init__(self, message, t=None, state=None, trajectory=None):
        super().__init__(message)
        self.t = t
        self.state = state
        self.trajectory = trajectory


class CutoffTooLarge(KGZError, ValueError):
    """The cutoff support does not fit inside the periodic box."""


class WindowTooShort(KGZError, ValueError):
    """Too few samples for a finite-difference stencil."""
