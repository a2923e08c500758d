"""Uniform quantization with an MSE-driven grid search over the clipping range."""

from dataclasses import dataclass

import numpy as np

from ..config import DEFAULT_UQ_SPLIT, SCALAR_BITS
from ..errors import MatrixError
from ..matrix import MemoryFootprint, as_dense

MAX_UQ_BITS = 16


def _index_dtype(bits: int):
    return np.uint8 if bits <= 8 else np.uint16  # noqa: PLR2004


@dataclass(frozen=True)
class UqCode:
    """W ~ a * Q + b with integer levels Q in [0, 2^bits - 1]."""

    bits: int
    indices: np.ndarray
    a: float
    b: float

    def __post_init__(self):
        if not 1 <= self.bits <= MAX_UQ_BITS:
            msg = f"bits must be in [1, {MAX_UQ_BITS}], got {self.bits}"
            raise MatrixError(msg)
        if self.indices.size and int(self.indices.max()) >= 2**self.bits:
            msg = f"index {int(self.indices.max())} does not fit in {self.bits} bits"
            raise MatrixError(msg)

    @property
    def shape(self) -> tuple[int, int]:
        return self.indices.shape

    def dequantize(self) -> np.ndarray:
        return self.a * self.indices.astype(np.float64) + self.b

    def footprint(self, scalar_bits: int = SCALAR_BITS) -> MemoryFootprint:
        return MemoryFootprint(
            binary_bits=self.bits * self.indices.size,
            scalar_count=2,
            scalar_bits_each=scalar_bits,
        )

    def to_sections(self) -> dict[str, np.ndarray]:
        return {
            "bits": np.array([self.bits], dtype=np.uint8),
            "indices": self.indices,
            "ab": np.array([self.a, self.b]),
        }

    @classmethod
    def from_sections(cls, sections: dict[str, np.ndarray]) -> "UqCode":
        bits = int(sections["bits"][0])
        a, b = (float(v) for v in sections["ab"])
        return cls(bits=bits, indices=sections["indices"].astype(_index_dtype(bits)), a=a, b=b)


def _quantize(w: np.ndarray, r_min, r_max, levels: int):
    """Clip-quantize ``w`` against one or many (r_min, r_max) ranges."""
    a = (r_max - r_min) / levels
    q = np.clip(np.round((w - r_min) / a), 0, levels)
    return q, a


def uq_grid(w, bits: int, n_split: int = DEFAULT_UQ_SPLIT) -> UqCode:
    """Grid-search uniform quantizer.

    r_max runs over ``n_split`` points from mean(W) to max(W) and, for each, r_min over
    ``n_split`` points from min(W) to mean(W). The (r_min, r_max) pair with the lowest
    reconstruction MSE wins; the first one found on ties. The naive full-range quantizer
    is part of the grid, so the result is never worse than it.
    """
    w = as_dense(w)
    if not 1 <= bits <= MAX_UQ_BITS:
        msg = f"bits must be in [1, {MAX_UQ_BITS}], got {bits}"
        raise MatrixError(msg)
    if n_split < 2:  # noqa: PLR2004
        msg = f"n_split must be at least 2, got {n_split}"
        raise MatrixError(msg)

    dtype = _index_dtype(bits)
    lo, hi, mean = float(w.min()), float(w.max()), float(w.mean())
    if hi == lo:
        return UqCode(bits=bits, indices=np.zeros(w.shape, dtype=dtype), a=0.0, b=lo)

    levels = 2**bits - 1
    flat = w.ravel()
    r_mins = np.linspace(lo, mean, n_split)
    best_err, best = np.inf, (lo, hi)
    for r_max in np.linspace(mean, hi, n_split):
        candidates = r_mins[r_mins < r_max]
        if candidates.size == 0:
            continue
        q, a = _quantize(flat[None, :], candidates[:, None], r_max, levels)
        errors = np.mean((flat[None, :] - (a * q + candidates[:, None])) ** 2, axis=1)
        index = int(np.argmin(errors))
        if errors[index] < best_err:
            best_err, best = float(errors[index]), (float(candidates[index]), float(r_max))

    r_min, r_max = best
    q, a = _quantize(w, r_min, r_max, levels)
    return UqCode(bits=bits, indices=q.astype(dtype), a=float(a), b=r_min)


def uq_minmax(w, bits: int) -> UqCode:
    """Full-range uniform quantizer over [min(W), max(W)]."""
    w = as_dense(w)
    lo, hi = float(w.min()), float(w.max())
    dtype = _index_dtype(bits)
    if hi == lo:
        return UqCode(bits=bits, indices=np.zeros(w.shape, dtype=dtype), a=0.0, b=lo)
    q, a = _quantize(w, lo, hi, 2**bits - 1)
    return UqCode(bits=bits, indices=q.astype(dtype), a=float(a), b=lo)
