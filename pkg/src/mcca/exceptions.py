"""Exception types raised across the package."""


class ShapeError(ValueError):
    """Array dimensions are inconsistent with the requested operation."""


class FormatError(ValueError):
    """A file does not follow the expected binary or text format."""


class ConvergenceError(RuntimeError):
    """An iterative numerical routine hit its iteration cap."""
