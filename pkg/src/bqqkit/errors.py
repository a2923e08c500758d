"""Exception hierarchy shared by every bqqkit module."""


class BqqError(Exception):
    """Base class for all bqqkit errors."""


class MatrixError(BqqError, ValueError):
    """Invalid matrix input: empty, non-finite, wrong shape or rank."""


class SolverError(BqqError, ValueError):
    """Invalid input to the PUBO solver or its oracles."""


class ConfigError(BqqError, ValueError):
    """Invalid sweep configuration."""


class FormatError(BqqError, ValueError):
    """Malformed file or byte stream.

    Attributes:
        offset: Byte offset (binary formats) or 1-based line number (text formats)
        unit: Either "byte" or "line"
    """

    def __init__(self, message: str, offset: int, unit: str = "byte"):
        self.offset = offset
        self.unit = unit
        super().__init__(f"{message} (at {unit} {offset})")
