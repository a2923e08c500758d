"""Binary container for quantized codes.

Layout (little-endian):

    magic b"BQQC" | u16 version | u8 len + method id | u8 standardized flag | f64 mean |
    f64 std | u8 scalar width (32 or 64) | u8 layout (0 single, 1 grouped) | payload

A single BQQ payload is u32 m, n, l, p; the r, s and t scalars of every stack and then
u_total at the scalar width; then per stack the packed Y followed by the packed Z. Any
other method stores named sections. A grouped payload is u32 m, n, block count and per
block u32 row0, col0, u32 byte length and a single payload.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .config import SCALAR_BITS
from .errors import FormatError, MatrixError
from .matrix import BitMatrix, StandardizationRecord, destandardize
from .methods import get_method
from .quantizers import BqqCode, BqqStack, GroupedCode

MAGIC = b"BQQC"
VERSION = 1
LAYOUT_SINGLE = 0
LAYOUT_GROUPED = 1
SCALAR_DTYPES = {32: "<f4", 64: "<f8"}
UINT_TAGS = {"u1": "<u1", "u2": "<u2", "u4": "<u4"}


@dataclass(frozen=True)
class StoredCode:
    """A decoded container."""

    method: str
    code: object
    standardization: StandardizationRecord
    scalar_bits: int

    def dequantize(self) -> np.ndarray:
        """Reconstruction in the original (de-standardized) units."""
        return destandardize(self.code.dequantize(), self.standardization)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            msg = f"truncated input: needed {size} bytes, {len(self.data) - self.offset} left"
            raise FormatError(msg, offset=self.offset)
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str) -> tuple:
        layout = struct.Struct("<" + fmt)
        return layout.unpack(self.take(layout.size))

    def text(self) -> str:
        (size,) = self.unpack("B")
        start = self.offset
        raw = self.take(size)
        try:
            return raw.decode("ascii")
        except UnicodeDecodeError as e:
            msg = "string field is not ASCII"
            raise FormatError(msg, offset=start + e.start) from e

    def array(self, dtype: str, count: int) -> np.ndarray:
        itemsize = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(itemsize * count), dtype=dtype).copy()


def _text(value: str) -> bytes:
    raw = value.encode("ascii")
    return struct.pack("<B", len(raw)) + raw


def _scalar_dtype(scalar_bits: int) -> str:
    if scalar_bits not in SCALAR_DTYPES:
        msg = f"scalar width must be 32 or 64 bits, got {scalar_bits}"
        raise MatrixError(msg)
    return SCALAR_DTYPES[scalar_bits]


def _encode_bqq(code: BqqCode, dtype: str) -> bytes:
    m, n = code.shape
    scalars = [stack.r for stack in code.stacks]
    scalars += [stack.s for stack in code.stacks]
    scalars += [stack.t for stack in code.stacks]
    scalars.append(code.u_total)
    parts = [
        struct.pack("<IIII", m, n, code.l, code.p),
        np.asarray(scalars, dtype=dtype).tobytes(),
    ]
    for stack in code.stacks:
        parts += [stack.y.bits, stack.z.bits]
    return b"".join(parts)


def _decode_bqq(reader: _Reader, dtype: str) -> BqqCode:
    m, n, l, p = reader.unpack("IIII")  # noqa: E741
    if min(m, n, l, p) < 1:
        msg = f"invalid BQQ dimensions m={m} n={n} l={l} p={p}"
        raise FormatError(msg, offset=reader.offset - 16)
    scalars = reader.array(dtype, 3 * p + 1).astype(np.float64)
    r, s, t = scalars[:p], scalars[p : 2 * p], scalars[2 * p : 3 * p]
    u_total = float(scalars[-1])
    stacks = []
    for index in range(p):
        y = BitMatrix(m, l, reader.take(-(-m * l // 8)))
        z = BitMatrix(l, n, reader.take(-(-l * n // 8)))
        # Only the total bias is stored; it is carried by the first stack
        stacks.append(
            BqqStack(
                y=y,
                z=z,
                r=float(r[index]),
                s=float(s[index]),
                t=float(t[index]),
                u=u_total if index == 0 else 0.0,
            )
        )
    return BqqCode(stacks=tuple(stacks), u_total=u_total, shape=(m, n), l=l)


def _section_tag(array: np.ndarray, dtype: str) -> tuple[str, bytes]:
    if array.dtype == np.bool_:
        return "bits", np.packbits(array.ravel()).tobytes()
    if array.dtype.kind == "f":
        return dtype.lstrip("<"), array.astype(dtype).tobytes()
    if array.dtype.kind in "ui":
        if array.size and int(array.min()) < 0:
            msg = "integer sections must be non-negative"
            raise MatrixError(msg)
        top = int(array.max()) if array.size else 0
        for tag, target in UINT_TAGS.items():
            if top <= np.iinfo(target).max:
                return tag, array.astype(target).tobytes()
    msg = f"cannot store a section of dtype {array.dtype}"
    raise MatrixError(msg)


def _encode_sections(code, dtype: str) -> bytes:
    sections = code.to_sections()
    parts = [struct.pack("<H", len(sections))]
    for name, value in sections.items():
        array = np.asarray(value)
        tag, raw = _section_tag(array, dtype)
        parts += [
            _text(name),
            _text(tag),
            struct.pack("<B", array.ndim),
            struct.pack(f"<{array.ndim}I", *array.shape),
            struct.pack("<Q", len(raw)),
            raw,
        ]
    return b"".join(parts)


def _section_bytes(tag: str, count: int) -> int | None:
    if tag == "bits":
        return -(-count // 8)
    if tag in ("f4", "f8"):
        return count * np.dtype("<" + tag).itemsize
    if tag in UINT_TAGS:
        return count * np.dtype(UINT_TAGS[tag]).itemsize
    return None


def _decode_sections(reader: _Reader, code_type: type):
    (count,) = reader.unpack("H")
    sections = {}
    for _ in range(count):
        start = reader.offset
        name, tag = reader.text(), reader.text()
        (ndim,) = reader.unpack("B")
        shape = reader.unpack(f"{ndim}I")
        (size,) = reader.unpack("Q")
        raw = reader.take(size)
        count_items = int(np.prod(shape, dtype=np.int64))
        expected = _section_bytes(tag, count_items)
        if expected is None:
            msg = f"unknown section type {tag!r}"
            raise FormatError(msg, offset=start)
        if size != expected:
            msg = f"section {name!r} holds {size} bytes, shape {shape} needs {expected}"
            raise FormatError(msg, offset=start)
        if tag == "bits":
            bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), count=count_items)
            array = bits.astype(np.bool_)
        elif tag in ("f4", "f8"):
            array = np.frombuffer(raw, dtype="<" + tag).astype(np.float64)
        else:
            array = np.frombuffer(raw, dtype=UINT_TAGS[tag]).copy()
        sections[name] = array.reshape(shape)
    try:
        return code_type.from_sections(sections)
    except (KeyError, ValueError) as e:
        msg = f"inconsistent sections for {code_type.__name__}: {e}"
        raise FormatError(msg, offset=reader.offset) from e


def _encode_single(code, dtype: str) -> bytes:
    if isinstance(code, BqqCode):
        return _encode_bqq(code, dtype)
    return _encode_sections(code, dtype)


def _decode_single(reader: _Reader, method: str, dtype: str):
    if method == "bqq":
        return _decode_bqq(reader, dtype)
    return _decode_sections(reader, get_method(method).code_type)


def encode_code(
    code,
    method: str,
    *,
    standardization: StandardizationRecord | None = None,
    scalar_bits: int = SCALAR_BITS,
) -> bytes:
    """Serialize ``code`` produced by ``method``.

    For BQQ codes the code's own standardization record is used when none is given.
    """
    get_method(method)
    dtype = _scalar_dtype(scalar_bits)
    record = standardization or getattr(code, "standardization", None)
    parts = [
        MAGIC,
        struct.pack("<H", VERSION),
        _text(method),
        struct.pack(
            "<Bdd",
            record is not None,
            record.mean if record else 0.0,
            record.std if record else 1.0,
        ),
        struct.pack("<B", scalar_bits),
    ]
    if isinstance(code, GroupedCode):
        parts += [
            struct.pack("<B", LAYOUT_GROUPED),
            struct.pack("<III", *code.shape, len(code.blocks)),
        ]
        for (row0, col0), block in code.blocks:
            payload = _encode_single(block, dtype)
            parts += [struct.pack("<III", row0, col0, len(payload)), payload]
    else:
        parts += [struct.pack("<B", LAYOUT_SINGLE), _encode_single(code, dtype)]
    return b"".join(parts)


def decode_code(data: bytes) -> StoredCode:
    """Parse a container written by ``encode_code``.

    Raises:
        FormatError: On a bad header, a truncated payload or trailing bytes
    """
    reader = _Reader(data)
    if reader.take(len(MAGIC)) != MAGIC:
        msg = "not a BQQ code file (bad magic)"
        raise FormatError(msg, offset=0)
    (version,) = reader.unpack("H")
    if version != VERSION:
        msg = f"unsupported code version {version}"
        raise FormatError(msg, offset=4)
    method_offset = reader.offset
    method = reader.text()
    try:
        get_method(method)
    except ValueError:
        msg = f"unknown method {method!r}"
        raise FormatError(msg, offset=method_offset) from None
    flag, mean, std = reader.unpack("Bdd")
    record = (
        StandardizationRecord(mean=mean, std=std) if flag else StandardizationRecord.identity()
    )
    (scalar_bits,) = reader.unpack("B")
    if scalar_bits not in SCALAR_DTYPES:
        msg = f"unsupported scalar width {scalar_bits}"
        raise FormatError(msg, offset=reader.offset - 1)
    dtype = SCALAR_DTYPES[scalar_bits]
    (layout,) = reader.unpack("B")

    if layout == LAYOUT_SINGLE:
        code = _decode_single(reader, method, dtype)
    elif layout == LAYOUT_GROUPED:
        m, n, count = reader.unpack("III")
        blocks = []
        for _ in range(count):
            row0, col0, size = reader.unpack("III")
            end = reader.offset + size
            block = _decode_single(reader, method, dtype)
            if reader.offset != end:
                msg = f"block payload length {size} does not match its contents"
                raise FormatError(msg, offset=reader.offset)
            blocks.append(((row0, col0), block))
        code = GroupedCode(shape=(m, n), blocks=tuple(blocks))
    else:
        msg = f"unknown layout {layout}"
        raise FormatError(msg, offset=reader.offset - 1)

    if reader.offset != len(data):
        msg = f"{len(data) - reader.offset} trailing bytes"
        raise FormatError(msg, offset=reader.offset)
    return StoredCode(
        method=method, code=code, standardization=record, scalar_bits=scalar_bits
    )
