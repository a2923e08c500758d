"""Delimited text matrices, one row per line, split on commas or whitespace."""

import numpy as np

from ..errors import FormatError


def parse_delimited(text: str, delimiter: str | None = None) -> np.ndarray:
    """Parse a text matrix. Blank lines and lines starting with '#' are skipped.

    Without a ``delimiter``, lines containing a comma are split on commas and all others
    on whitespace.

    Raises:
        FormatError: On a non-numeric or non-finite field, rows of differing length or an
            input without rows, naming the 1-based line number
    """
    rows: list[list[float]] = []
    width = None
    last_line = 0
    for line_number, raw in enumerate(text.splitlines(), start=1):
        last_line = line_number
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        sep = delimiter if delimiter is not None else ("," if "," in line else None)
        fields = [field.strip() for field in line.split(sep)]
        try:
            row = [float(field) for field in fields]
        except ValueError:
            msg = f"non-numeric field in {line!r}"
            raise FormatError(msg, offset=line_number, unit="line") from None
        if not all(np.isfinite(row)):
            msg = f"non-finite field in {line!r}"
            raise FormatError(msg, offset=line_number, unit="line")
        if width is None:
            width = len(row)
        elif len(row) != width:
            msg = f"row has {len(row)} fields, expected {width}"
            raise FormatError(msg, offset=line_number, unit="line")
        rows.append(row)
    if not rows:
        msg = "no matrix rows found"
        raise FormatError(msg, offset=last_line, unit="line")
    return np.array(rows)


def format_delimited(w, delimiter: str = ",") -> str:
    """Render with shortest round-trip float formatting."""
    w = np.atleast_2d(np.asarray(w, dtype=np.float64))
    return "".join(delimiter.join(repr(float(v)) for v in row) + "\n" for row in w)
