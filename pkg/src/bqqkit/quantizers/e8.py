"""Residual lattice vector quantization on the 240 minimal vectors of E8."""

from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from ..config import DEFAULT_E8_SCALE_BITS, DEFAULT_UQ_SPLIT, SCALAR_BITS, logger
from ..errors import MatrixError
from ..matrix import MemoryFootprint, as_dense
from .uq import UqCode, uq_grid
from .vq import from_vectors, to_vectors

E8_DIM = 8
E8_SIZE = 240
E8_INDEX_BITS = 8


def e8_codebook() -> np.ndarray:
    """The 240 E8 vectors of norm sqrt(2).

    112 have two entries of +-1 and zeros elsewhere. 128 have every entry +-1/2 with an
    even number of minus signs.
    """
    rows = []
    for i, j in combinations(range(E8_DIM), 2):
        for si, sj in product((1.0, -1.0), repeat=2):
            row = np.zeros(E8_DIM)
            row[i], row[j] = si, sj
            rows.append(row)
    for signs in product((0, 1), repeat=E8_DIM):
        if sum(signs) % 2 == 0:
            rows.append(0.5 * (-1.0) ** np.array(signs))
    return np.array(rows)


@dataclass(frozen=True)
class E8Code:
    """Per-round codebook indices and per-vector scales.

    Attributes:
        shape: Shape of the quantized matrix
        indices: (rounds, n_vec) codebook indices
        scales: One ``UqCode`` of the per-vector scales per round, or a
            (rounds, n_vec) real array when scale quantization is off
    """

    shape: tuple[int, int]
    indices: np.ndarray
    scales: tuple[UqCode, ...] | np.ndarray

    def __post_init__(self):
        if self.indices.size and int(self.indices.max()) >= E8_SIZE:
            msg = f"E8 index {int(self.indices.max())} out of range"
            raise MatrixError(msg)

    @property
    def n_bits(self) -> int:
        return self.indices.shape[0]

    @property
    def scale_bits(self) -> int | None:
        if isinstance(self.scales, np.ndarray):
            return None
        return self.scales[0].bits

    def alphas(self) -> np.ndarray:
        if isinstance(self.scales, np.ndarray):
            return self.scales
        return np.vstack([code.dequantize() for code in self.scales])

    def dequantize(self) -> np.ndarray:
        codebook = e8_codebook()
        vectors = np.einsum("rv,rvd->vd", self.alphas(), codebook[self.indices])
        return from_vectors(vectors, self.shape)

    def footprint(self, scalar_bits: int = SCALAR_BITS) -> MemoryFootprint:
        total = MemoryFootprint(
            binary_bits=self.indices.size * E8_INDEX_BITS,
            scalar_count=0,
            scalar_bits_each=scalar_bits,
        )
        if isinstance(self.scales, np.ndarray):
            return total + MemoryFootprint(0, self.scales.size, scalar_bits)
        for code in self.scales:
            total = total + code.footprint(scalar_bits)
        return total

    def to_sections(self) -> dict[str, np.ndarray]:
        sections = {
            "shape": np.array(self.shape, dtype=np.uint32),
            "indices": self.indices,
        }
        if isinstance(self.scales, np.ndarray):
            sections["alphas"] = self.scales
        else:
            sections["scale_bits"] = np.array([self.scale_bits], dtype=np.uint8)
            sections["scale_indices"] = np.vstack([code.indices for code in self.scales])
            sections["scale_ab"] = np.array([(code.a, code.b) for code in self.scales])
        return sections

    @classmethod
    def from_sections(cls, sections: dict[str, np.ndarray]) -> "E8Code":
        shape = tuple(int(v) for v in sections["shape"])
        if "alphas" in sections:
            scales = sections["alphas"]
        else:
            bits = sections["scale_bits"]
            scales = tuple(
                UqCode.from_sections(
                    {"bits": bits, "indices": row[None, :], "ab": ab}
                )
                for row, ab in zip(
                    sections["scale_indices"], sections["scale_ab"], strict=True
                )
            )
        return cls(shape=shape, indices=sections["indices"], scales=scales)


def e8_lvq(
    w, n_bits: int, scale_bits: int | None = DEFAULT_E8_SCALE_BITS
) -> E8Code:
    """Residual E8 quantization in ``n_bits`` rounds.

    Every round picks, per 8-long vector, the codebook entry of highest cosine similarity
    with the residual, fits its least-squares scale, quantizes the round's scales jointly
    with a ``scale_bits`` grid-search UQ (skipped when ``scale_bits`` is None or 0) and
    subtracts the scaled entries.
    """
    if n_bits < 1:
        msg = f"n_bits must be at least 1, got {n_bits}"
        raise MatrixError(msg)
    w = as_dense(w)
    codebook = e8_codebook()
    residual = to_vectors(w, E8_DIM)
    indices, scales = [], []

    for round_index in range(n_bits):
        # Every entry has the same norm, so the largest dot product is the largest cosine
        chosen = np.argmax(residual @ codebook.T, axis=1)
        centroids = codebook[chosen]
        alpha = np.sum(residual * centroids, axis=1) / 2.0
        if scale_bits:
            code = uq_grid(alpha[None, :], scale_bits, DEFAULT_UQ_SPLIT)
            alpha = code.dequantize().ravel()
            scales.append(code)
        else:
            scales.append(alpha)
        residual = residual - alpha[:, None] * centroids
        indices.append(chosen.astype(np.uint8))
        logger.debug(
            f"E8 round {round_index + 1}/{n_bits}: residual norm {np.linalg.norm(residual):.6g}"
        )

    return E8Code(
        shape=w.shape,
        indices=np.vstack(indices),
        scales=tuple(scales) if scale_bits else np.vstack(scales),
    )
