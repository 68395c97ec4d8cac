from typing import Optional


class GridError(Exception):
    """Base class for errors raised while building or analysing grids."""

    def __init__(self, message: str, grid: Optional[str] = None):
        """Initialize GridError.

        Args:
            message: Error description
            grid: Compact form of the grid involved, if any
        """
        self.grid = grid
        super().__init__(f"{message} (grid {grid})" if grid else message)


class GridFormatError(GridError):
    """Grid text could not be parsed."""


class TooSmallError(GridError):
    """Grid index below 2."""


class NotAPermutationError(GridError):
    """A marking sequence repeats a value or leaves the range 1..n."""


class DoubleMarkingError(GridError):
    """Some cell carries both an O and an X."""


class NotCoprimeError(GridError):
    """Torus parameters do not describe a knot."""


class InputIsLinkError(GridError):
    """A knot was required but the diagram has several components."""


class NoTwistCornerError(GridError):
    """No marking with the requested corner type exists for the cable twist."""


class ClosureIsLinkError(GridError):
    """The braid closes up to a link."""


class BadLetterError(GridError):
    """A braid letter is zero or exceeds the strand count."""


class IllegalCommutationError(GridError):
    """The two columns interleave."""


class NoSuchMarkingError(GridError):
    """The requested column or marking does not exist."""


class NotAStabilizationBlockError(GridError):
    """A 2x2 block does not carry a stabilization pattern."""
