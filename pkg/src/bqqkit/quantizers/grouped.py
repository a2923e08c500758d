"""Group-wise application of any quantizer to the tiles of a matrix."""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ..config import SCALAR_BITS
from ..errors import MatrixError
from ..matrix import MemoryFootprint, as_dense

# Quantizes one tile; the second argument is the tile's position in row-major tile order
BlockQuantizer = Callable[[np.ndarray, int], object]


@dataclass(frozen=True)
class GroupedCode:
    """Independent codes for the tiles of an m x n matrix.

    Attributes:
        shape: Shape of the whole matrix
        blocks: ((row0, col0), code) per tile, in row-major tile order
    """

    shape: tuple[int, int]
    blocks: tuple[tuple[tuple[int, int], object], ...]

    def dequantize(self) -> np.ndarray:
        w = np.empty(self.shape)
        for (row0, col0), code in self.blocks:
            block = code.dequantize()
            rows, cols = block.shape
            w[row0 : row0 + rows, col0 : col0 + cols] = block
        return w

    def footprint(self, scalar_bits: int = SCALAR_BITS) -> MemoryFootprint:
        total = MemoryFootprint(0, 0, scalar_bits)
        for _, code in self.blocks:
            total = total + code.footprint(scalar_bits)
        return total


def tiles(m: int, n: int, group_rows: int, group_cols: int) -> list[tuple[int, int, int, int]]:
    """(row0, col0, rows, cols) of every tile; trailing tiles keep their natural size."""
    return [
        (row0, col0, min(group_rows, m - row0), min(group_cols, n - col0))
        for row0 in range(0, m, group_rows)
        for col0 in range(0, n, group_cols)
    ]


def groupwise_quantize(
    w, group_rows: int, group_cols: int, quantizer: BlockQuantizer
) -> GroupedCode:
    """Tile ``w`` into blocks of at most group_rows x group_cols and quantize each."""
    if group_rows < 1 or group_cols < 1:
        msg = f"group dimensions must be positive, got {group_rows}x{group_cols}"
        raise MatrixError(msg)
    w = as_dense(w)
    blocks = []
    for index, (row0, col0, rows, cols) in enumerate(tiles(*w.shape, group_rows, group_cols)):
        code = quantizer(w[row0 : row0 + rows, col0 : col0 + cols], index)
        blocks.append(((row0, col0), code))
    return GroupedCode(shape=w.shape, blocks=tuple(blocks))
