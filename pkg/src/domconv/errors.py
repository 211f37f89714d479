"""Exception types shared across the package."""


class DomconvError(Exception):
    """Base class for all package errors."""


class GridMismatchError(DomconvError):
    """Two objects that must share a grid were built on different grids."""


class ValidationError(DomconvError):
    """An input violated a documented precondition."""


class ResolutionError(ValidationError):
    """A grid is too coarse to represent a corpus term faithfully."""


class InvariantViolationError(DomconvError):
    """A mathematical guarantee failed numerically; indicates a bug, not bad input."""
