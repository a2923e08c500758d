"""k-means vector quantization of a flattened matrix, optionally with a UQ codebook."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.cluster.vq import vq

from ..config import (
    DEFAULT_UQ_SPLIT,
    DEFAULT_VQ_MAX_ITER,
    DEFAULT_VQ_TOL,
    SCALAR_BITS,
    logger,
)
from ..errors import MatrixError
from ..matrix import MemoryFootprint, as_dense, make_rng
from .uq import UqCode, uq_grid


def to_vectors(w: np.ndarray, vec_dim: int) -> np.ndarray:
    """Row-major flatten, zero-pad to a multiple of ``vec_dim`` and reshape."""
    flat = np.asarray(w, dtype=np.float64).ravel()
    pad = -flat.size % vec_dim
    return np.concatenate([flat, np.zeros(pad)]).reshape(-1, vec_dim)


def from_vectors(vectors: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Drop the padding and restore ``shape``."""
    return vectors.ravel()[: shape[0] * shape[1]].reshape(shape)


@dataclass(frozen=True)
class VqCode:
    """Codebook indices of the vec_dim-long pieces of the flattened matrix.

    Attributes:
        shape: Shape of the quantized matrix
        codebook: (k, vec_dim) centroids, or their ``UqCode``
        assignments: Centroid index of every vector
        sse_history: Within-cluster SSE after each Lloyd assignment (not stored)
    """

    shape: tuple[int, int]
    codebook: np.ndarray | UqCode
    assignments: np.ndarray
    sse_history: tuple[float, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.assignments.size and int(self.assignments.max()) >= self.k:
            msg = f"assignment {int(self.assignments.max())} exceeds codebook size {self.k}"
            raise MatrixError(msg)

    @property
    def k(self) -> int:
        return self.codebook.shape[0]

    @property
    def vec_dim(self) -> int:
        return self.codebook.shape[1]

    def centroids(self) -> np.ndarray:
        if isinstance(self.codebook, UqCode):
            return self.codebook.dequantize()
        return self.codebook

    def dequantize(self) -> np.ndarray:
        return from_vectors(self.centroids()[self.assignments], self.shape)

    def footprint(self, scalar_bits: int = SCALAR_BITS) -> MemoryFootprint:
        index_bits = self.assignments.size * math.ceil(math.log2(self.k))
        if isinstance(self.codebook, UqCode):
            book = self.codebook.footprint(scalar_bits)
            return MemoryFootprint(
                binary_bits=index_bits + book.binary_bits,
                scalar_count=book.scalar_count,
                scalar_bits_each=scalar_bits,
            )
        return MemoryFootprint(
            binary_bits=index_bits,
            scalar_count=self.codebook.size,
            scalar_bits_each=scalar_bits,
        )

    def to_sections(self) -> dict[str, np.ndarray]:
        sections = {
            "shape": np.array(self.shape, dtype=np.uint32),
            "assignments": self.assignments,
        }
        if isinstance(self.codebook, UqCode):
            sections.update(
                {f"codebook_{key}": value for key, value in self.codebook.to_sections().items()}
            )
        else:
            sections["codebook"] = self.codebook
        return sections

    @classmethod
    def from_sections(cls, sections: dict[str, np.ndarray]) -> "VqCode":
        if "codebook" in sections:
            codebook = sections["codebook"]
        else:
            codebook = UqCode.from_sections(
                {
                    key.removeprefix("codebook_"): value
                    for key, value in sections.items()
                    if key.startswith("codebook_")
                }
            )
        shape = tuple(int(v) for v in sections["shape"])
        return cls(shape=shape, codebook=codebook, assignments=sections["assignments"])


def kmeans_plus_plus(vectors: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: each new centroid drawn with probability proportional to D^2."""
    centroids = np.empty((k, vectors.shape[1]))
    centroids[0] = vectors[rng.integers(len(vectors))]
    closest = np.sum((vectors - centroids[0]) ** 2, axis=1)
    for index in range(1, k):
        total = closest.sum()
        if total > 0:
            pick = rng.choice(len(vectors), p=closest / total)
        else:
            pick = rng.integers(len(vectors))
        centroids[index] = vectors[pick]
        closest = np.minimum(closest, np.sum((vectors - centroids[index]) ** 2, axis=1))
    return centroids


def lloyd(
    vectors: np.ndarray,
    centroids: np.ndarray,
    max_iter: int = DEFAULT_VQ_MAX_ITER,
    tol: float = DEFAULT_VQ_TOL,
) -> tuple[np.ndarray, list[float]]:
    """Alternate assignment and mean updates until the SSE improves by less than ``tol``
    (relative) or ``max_iter`` updates ran. Empty clusters keep their centroid.
    """
    centroids = centroids.copy()
    history: list[float] = []
    for _ in range(max_iter):
        labels, distances = vq(vectors, centroids)
        history.append(float(np.sum(distances**2)))
        if len(history) > 1 and history[-2] - history[-1] <= tol * max(history[-2], 1e-300):
            break
        counts = np.bincount(labels, minlength=len(centroids))
        sums = np.zeros_like(centroids)
        np.add.at(sums, labels, vectors)
        filled = counts > 0
        centroids[filled] = sums[filled] / counts[filled, None]
    return centroids, history


def vq_kmeans(
    w,
    vec_dim: int,
    k: int,
    seed: int = 0,
    centroid_bits: int | None = None,
    *,
    max_iter: int = DEFAULT_VQ_MAX_ITER,
    tol: float = DEFAULT_VQ_TOL,
) -> VqCode:
    """Cluster the flattened matrix into ``k`` centroids of length ``vec_dim``.

    With ``centroid_bits`` the codebook is grid-search uniform-quantized and every vector
    is reassigned to its nearest quantized centroid.

    Raises:
        MatrixError: If k is below 1 or exceeds the number of vectors
    """
    w = as_dense(w)
    if vec_dim < 1:
        msg = f"vec_dim must be positive, got {vec_dim}"
        raise MatrixError(msg)
    vectors = to_vectors(w, vec_dim)
    if not 1 <= k <= len(vectors):
        msg = f"k must be in [1, {len(vectors)}] for {len(vectors)} vectors, got {k}"
        raise MatrixError(msg)

    centroids = kmeans_plus_plus(vectors, k, make_rng(seed))
    centroids, history = lloyd(vectors, centroids, max_iter, tol)
    logger.debug(f"k-means: {len(history)} assignments, final SSE {history[-1]:.6g}")

    codebook: np.ndarray | UqCode = centroids
    if centroid_bits is not None:
        codebook = uq_grid(centroids, centroid_bits, DEFAULT_UQ_SPLIT)
        centroids = codebook.dequantize()
    labels, _ = vq(vectors, centroids)
    return VqCode(
        shape=w.shape,
        codebook=codebook,
        assignments=labels.astype(np.uint32),
        sse_history=tuple(history),
    )
