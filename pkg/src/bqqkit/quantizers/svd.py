"""Truncated SVD and its factor-quantized variant."""

from dataclasses import dataclass

import numpy as np

from ..config import DEFAULT_UQ_SPLIT, SCALAR_BITS
from ..errors import MatrixError
from ..matrix import MemoryFootprint, as_dense
from .uq import UqCode, uq_grid


@dataclass(frozen=True)
class SvdCode:
    """W ~ L @ R with L = U_k S_k (m x k) and R = V_k^T (k x n).

    Each factor is either a real array or a ``UqCode``.
    """

    rank: int
    left: np.ndarray | UqCode
    right: np.ndarray | UqCode

    @property
    def quantized(self) -> bool:
        return isinstance(self.left, UqCode)

    @property
    def shape(self) -> tuple[int, int]:
        return self.left.shape[0], self.right.shape[1]

    def factors(self) -> tuple[np.ndarray, np.ndarray]:
        if self.quantized:
            return self.left.dequantize(), self.right.dequantize()
        return self.left, self.right

    def dequantize(self) -> np.ndarray:
        left, right = self.factors()
        return left @ right

    def footprint(self, scalar_bits: int = SCALAR_BITS) -> MemoryFootprint:
        if self.quantized:
            return self.left.footprint(scalar_bits) + self.right.footprint(scalar_bits)
        m, n = self.shape
        return MemoryFootprint(
            binary_bits=0,
            scalar_count=self.rank * (m + n),
            scalar_bits_each=scalar_bits,
        )

    def to_sections(self) -> dict[str, np.ndarray]:
        if not self.quantized:
            return {"left": self.left, "right": self.right}
        sections = {}
        for side, code in (("left", self.left), ("right", self.right)):
            for key, value in code.to_sections().items():
                sections[f"{side}_{key}"] = value
        return sections

    @classmethod
    def from_sections(cls, sections: dict[str, np.ndarray]) -> "SvdCode":
        if "left" in sections:
            left, right = sections["left"], sections["right"]
        else:
            left, right = (
                UqCode.from_sections(
                    {
                        key.removeprefix(f"{side}_"): value
                        for key, value in sections.items()
                        if key.startswith(f"{side}_")
                    }
                )
                for side in ("left", "right")
            )
        return cls(rank=left.shape[1], left=left, right=right)


def singular_values(w) -> np.ndarray:
    return np.linalg.svd(as_dense(w), compute_uv=False)


def _check_rank(w: np.ndarray, rank: int):
    if not 1 <= rank <= min(w.shape):
        msg = f"rank must be in [1, {min(w.shape)}] for a {w.shape} matrix, got {rank}"
        raise MatrixError(msg)


def svd_lowrank(w, rank: int) -> SvdCode:
    """Best rank-``rank`` approximation in Frobenius norm.

    The factorization is LAPACK's gesdd through ``numpy.linalg.svd``.
    """
    w = as_dense(w)
    _check_rank(w, rank)
    u, s, vt = np.linalg.svd(w, full_matrices=False)
    return SvdCode(rank=rank, left=u[:, :rank] * s[:rank], right=vt[:rank].copy())


def svd_uq(w, rank: int, bits: int, n_split: int = DEFAULT_UQ_SPLIT) -> SvdCode:
    """Truncated SVD whose two factors are each grid-search uniform-quantized."""
    code = svd_lowrank(w, rank)
    return SvdCode(
        rank=rank,
        left=uq_grid(code.left, bits, n_split),
        right=uq_grid(code.right, bits, n_split),
    )
