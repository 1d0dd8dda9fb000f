"""Exception hierarchy shared by every pipeline stage.

Each class doubles as the machine-parseable error category the CLI prints on
failure (``error:<Category>:<message>``).
"""


class FmerError(Exception):
    """Base class for all pipeline errors."""

    @property
    def category(self) -> str:
        return type(self).__name__


class ParseError(FmerError):
    """Malformed input file (manifest row, landmark file, frame header)."""


class ValidationError(FmerError):
    """Structurally valid input violating a domain invariant."""


class MissingFrame(FmerError):
    def __init__(self, index: int, path: str):
        super().__init__(f"frame {index} not found (looked for {path})")
        self.index = index
        self.path = path


class DimensionMismatch(FmerError):
    """Frame sizes differ within a sequence, or a feature row has the wrong length."""


class OutOfBounds(FmerError):
    def __init__(self, point_index: int, x: int, y: int, width: int, height: int):
        super().__init__(
            f"landmark {point_index} at ({x}, {y}) outside frame "
            f"[0, {width}) x [0, {height})"
        )
        self.point_index = point_index
        self.x = x
        self.y = y


class DegenerateRoi(FmerError):
    """ROI box thinner than 3 px after margin expansion and clamping."""


class TooSmall(FmerError):
    """Input frame or volume below the 3-px/3-frame minimum for LBP interiors."""


class ClassTooSmall(FmerError):
    """A class has too few samples for the requested split or fold count."""


class DegenerateData(FmerError):
    """Training data with a single label value."""


class EmptyInput(FmerError):
    """Metric called on zero samples."""


class IoError(FmerError):
    """Filesystem failure while writing report or feature files."""
