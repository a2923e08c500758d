"""Dense and bit-packed matrices, standardization, error metrics and memory accounting.

Dense matrices are plain 2-D float64 ``numpy`` arrays. ``as_dense`` is the validating
constructor every entry point runs its input through.
"""

from dataclasses import dataclass, field

import numpy as np

from .config import SCALAR_BITS
from .errors import MatrixError


def as_dense(values, *, name: str = "matrix") -> np.ndarray:
    """Validate and convert input into a finite, non-empty, 2-D float64 array.

    Args:
        values: Anything ``numpy.asarray`` accepts. 1-D input becomes a single row.
        name: Label used in error messages

    Returns:
        C-contiguous float64 array of shape (rows, cols)

    Raises:
        MatrixError: If the input is empty, has more than two dimensions or holds NaN/Inf
    """
    array = np.asarray(values, dtype=np.float64)
    if array.ndim == 1:
        array = array.reshape(1, -1)
    if array.ndim != 2:  # noqa: PLR2004
        msg = f"{name} must be 2-D, got {array.ndim} dimensions"
        raise MatrixError(msg)
    if array.size == 0:
        msg = f"{name} is empty"
        raise MatrixError(msg)
    if not np.all(np.isfinite(array)):
        msg = f"{name} contains NaN or Inf entries"
        raise MatrixError(msg)
    return np.ascontiguousarray(array)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator used for every seeded draw in the package."""
    return np.random.Generator(np.random.Philox(seed))


def sgn(values: np.ndarray) -> np.ndarray:
    """Sign with sgn(0) = +1."""
    return np.where(values >= 0, 1.0, -1.0)


@dataclass(frozen=True)
class BitMatrix:
    """Row-major, bit-packed {0,1} matrix."""

    rows: int
    cols: int
    bits: bytes

    @classmethod
    def from_dense(cls, values) -> "BitMatrix":
        """Pack a {0,1}-valued matrix.

        Raises:
            MatrixError: If any entry is not exactly 0 or 1
        """
        array = np.asarray(values)
        if array.ndim != 2:  # noqa: PLR2004
            msg = f"BitMatrix needs a 2-D input, got {array.ndim} dimensions"
            raise MatrixError(msg)
        if not np.all((array == 0) | (array == 1)):
            msg = "BitMatrix entries must be exactly 0 or 1"
            raise MatrixError(msg)
        packed = np.packbits(array.astype(np.uint8).ravel())
        return cls(rows=array.shape[0], cols=array.shape[1], bits=packed.tobytes())

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls.from_dense(np.zeros((rows, cols), dtype=np.uint8))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def to_dense(self) -> np.ndarray:
        """Unpack into a float64 {0,1} array."""
        return self.to_array(np.float64)

    def to_array(self, dtype=np.uint8) -> np.ndarray:
        unpacked = np.unpackbits(
            np.frombuffer(self.bits, dtype=np.uint8), count=self.rows * self.cols
        )
        return unpacked.reshape(self.rows, self.cols).astype(dtype)


@dataclass(frozen=True)
class StandardizationRecord:
    """Mean and population standard deviation removed by ``standardize``.

    Attributes:
        mean: Mean of the original matrix
        std: Population standard deviation (1.0 when the input was constant)
        constant: True when the input had a single distinct value
    """

    mean: float
    std: float
    constant: bool = False

    @classmethod
    def identity(cls) -> "StandardizationRecord":
        return cls(mean=0.0, std=1.0)


def standardize(w) -> tuple[np.ndarray, StandardizationRecord]:
    """Shift and scale to zero mean and unit population variance.

    Constant input maps to all zeros with ``std=1`` and the ``constant`` flag set.
    """
    w = as_dense(w)
    mean = float(w.mean())
    if np.ptp(w) == 0:
        return np.zeros_like(w), StandardizationRecord(mean=mean, std=1.0, constant=True)
    std = float(w.std())
    return (w - mean) / std, StandardizationRecord(mean=mean, std=std)


def destandardize(w: np.ndarray, record: StandardizationRecord) -> np.ndarray:
    """Invert ``standardize``."""
    return np.asarray(w, dtype=np.float64) * record.std + record.mean


def mse(a, b) -> float:
    """Mean squared error between two matrices of identical shape."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        msg = f"shape mismatch: {a.shape} vs {b.shape}"
        raise MatrixError(msg)
    return float(np.mean((a - b) ** 2))


@dataclass(frozen=True)
class MemoryFootprint:
    """Storage cost: 1 bit per binary element plus a fixed width per scalar."""

    binary_bits: int
    scalar_count: int
    scalar_bits_each: int = SCALAR_BITS
    total_bits: int = field(init=False)

    def __post_init__(self):
        if self.binary_bits < 0 or self.scalar_count < 0 or self.scalar_bits_each < 1:
            msg = (
                f"invalid footprint components: binary_bits={self.binary_bits} "
                f"scalar_count={self.scalar_count} scalar_bits_each={self.scalar_bits_each}"
            )
            raise MatrixError(msg)
        object.__setattr__(
            self,
            "total_bits",
            self.binary_bits + self.scalar_count * self.scalar_bits_each,
        )

    def __add__(self, other: "MemoryFootprint") -> "MemoryFootprint":
        if self.scalar_bits_each != other.scalar_bits_each:
            msg = "cannot add footprints with different scalar widths"
            raise MatrixError(msg)
        return MemoryFootprint(
            binary_bits=self.binary_bits + other.binary_bits,
            scalar_count=self.scalar_count + other.scalar_count,
            scalar_bits_each=self.scalar_bits_each,
        )

    @property
    def kilobytes(self) -> float:
        """Total size in KB (1 KB = 1000 bytes)."""
        return self.total_bits / 8 / 1000


def bqq_footprint(
    m: int, n: int, l: int, p: int, scalar_bits: int = SCALAR_BITS  # noqa: E741
) -> MemoryFootprint:
    """Footprint of a p-stack BQQ code: p*l*(m+n) bits plus 3p+1 scalars."""
    if min(m, n, l, p, scalar_bits) < 1:
        msg = f"all arguments must be positive, got m={m} n={n} l={l} p={p}"
        raise MatrixError(msg)
    return MemoryFootprint(
        binary_bits=p * l * (m + n),
        scalar_count=3 * p + 1,
        scalar_bits_each=scalar_bits,
    )
