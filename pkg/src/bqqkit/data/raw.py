"""Raw binary matrix files.

Header (little-endian): magic b"BQQM", u16 version, u32 rows, u32 cols, u16 element
width (8), followed by rows*cols float64 values in row-major order.
"""

import struct

import numpy as np

from ..errors import FormatError
from ..matrix import as_dense

RAW_MAGIC = b"BQQM"
RAW_VERSION = 1
RAW_ELEMENT_WIDTH = 8
RAW_HEADER = struct.Struct("<4sHIIH")


def write_raw(w) -> bytes:
    w = as_dense(w)
    rows, cols = w.shape
    header = RAW_HEADER.pack(RAW_MAGIC, RAW_VERSION, rows, cols, RAW_ELEMENT_WIDTH)
    return header + w.astype("<f8").tobytes()


def read_raw(data: bytes) -> np.ndarray:
    """Parse a raw matrix file.

    Raises:
        FormatError: On a bad magic, version or element width, a zero dimension, or a
            payload whose length differs from rows*cols*8
    """
    if len(data) < RAW_HEADER.size:
        msg = f"header needs {RAW_HEADER.size} bytes, got {len(data)}"
        raise FormatError(msg, offset=len(data))
    magic, version, rows, cols, width = RAW_HEADER.unpack_from(data)
    if magic != RAW_MAGIC:
        msg = f"bad magic {magic!r}"
        raise FormatError(msg, offset=0)
    if version != RAW_VERSION:
        msg = f"unsupported version {version}"
        raise FormatError(msg, offset=4)
    if rows < 1 or cols < 1:
        msg = f"empty matrix {rows}x{cols}"
        raise FormatError(msg, offset=6)
    if width != RAW_ELEMENT_WIDTH:
        msg = f"unsupported element width {width}"
        raise FormatError(msg, offset=14)
    expected = RAW_HEADER.size + rows * cols * width
    if len(data) != expected:
        msg = f"payload holds {len(data) - RAW_HEADER.size} bytes, expected {rows * cols * width}"
        raise FormatError(msg, offset=min(len(data), expected))
    values = np.frombuffer(data, dtype="<f8", offset=RAW_HEADER.size)
    return values.reshape(rows, cols).astype(np.float64)
