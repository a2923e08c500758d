"""fvecs feature files: each record is an int32 dimension followed by that many float32.

All fields are little-endian.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import FormatError

FIELD_BYTES = 4


@dataclass(frozen=True)
class FvecsRecordSet:
    """Vectors of a common dimension; ``dim`` is None for an empty file."""

    dim: int | None
    vectors: np.ndarray

    @property
    def empty(self) -> bool:
        return self.dim is None

    def as_matrix(self) -> np.ndarray:
        """One row per vector, in float64."""
        return self.vectors.astype(np.float64)


def parse_fvecs(data: bytes) -> FvecsRecordSet:
    """Parse a whole fvecs byte string.

    Raises:
        FormatError: On a non-positive or inconsistent dimension field, or a truncated
            record, naming the byte offset of the offending record
    """
    if not data:
        return FvecsRecordSet(dim=None, vectors=np.empty((0, 0), dtype=np.float32))
    if len(data) < FIELD_BYTES:
        msg = "truncated dimension field"
        raise FormatError(msg, offset=0)

    dim = int(np.frombuffer(data, dtype="<i4", count=1)[0])
    if dim < 1:
        msg = f"non-positive dimension {dim}"
        raise FormatError(msg, offset=0)
    record = FIELD_BYTES * (dim + 1)
    complete = len(data) // record

    fields = np.frombuffer(data, dtype="<i4", count=complete * (dim + 1)).reshape(
        complete, dim + 1
    )
    mismatched = np.flatnonzero(fields[:, 0] != dim)
    if mismatched.size:
        index = int(mismatched[0])
        msg = f"record {index} has dimension {int(fields[index, 0])}, expected {dim}"
        raise FormatError(msg, offset=index * record)
    if len(data) != complete * record:
        msg = f"truncated record: {len(data) - complete * record} trailing bytes"
        raise FormatError(msg, offset=complete * record)

    vectors = fields[:, 1:].copy().view("<f4").astype(np.float32)
    return FvecsRecordSet(dim=dim, vectors=vectors)


def write_fvecs(vectors) -> bytes:
    """Serialize a (count, dim) array; values are stored as float32."""
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    if vectors.ndim != 2 or vectors.shape[1] < 1:  # noqa: PLR2004
        msg = f"need a (count, dim) array with dim >= 1, got shape {vectors.shape}"
        raise FormatError(msg, offset=0)
    count, dim = vectors.shape
    records = np.empty((count, dim + 1), dtype="<i4")
    records[:, 0] = dim
    records[:, 1:] = vectors.view("<i4")
    return records.tobytes()
