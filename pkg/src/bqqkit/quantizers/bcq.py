"""Binary coding quantization: W ~ sum_i a_i B_i with sign matrices B_i."""

from dataclasses import dataclass
from itertools import product

import numpy as np

from ..config import MAX_BCQ_ROUNDS, SCALAR_BITS, logger
from ..errors import ConfigError, MatrixError
from ..matrix import BitMatrix, MemoryFootprint, as_dense, sgn
from .bqq import BqqCode, BqqStack


@dataclass(frozen=True)
class BcqCode:
    """Bases are stored as bits, 1 meaning +1 and 0 meaning -1."""

    bases: tuple[BitMatrix, ...]
    scales: tuple[float, ...]

    def __post_init__(self):
        if len(self.bases) != len(self.scales) or not self.bases:
            msg = f"need matching, non-empty bases and scales, got {len(self.bases)} and {len(self.scales)}"
            raise MatrixError(msg)

    @property
    def p(self) -> int:
        return len(self.bases)

    @property
    def shape(self) -> tuple[int, int]:
        return self.bases[0].shape

    def signs(self) -> np.ndarray:
        """(p, m, n) array of +-1 entries."""
        return np.stack([2.0 * basis.to_dense() - 1.0 for basis in self.bases])

    def dequantize(self) -> np.ndarray:
        return np.tensordot(np.asarray(self.scales), self.signs(), axes=1)

    def footprint(self, scalar_bits: int = SCALAR_BITS) -> MemoryFootprint:
        m, n = self.shape
        return MemoryFootprint(
            binary_bits=self.p * m * n,
            scalar_count=self.p,
            scalar_bits_each=scalar_bits,
        )

    def to_sections(self) -> dict[str, np.ndarray]:
        return {
            "bases": np.stack([basis.to_array(np.bool_) for basis in self.bases]),
            "scales": np.asarray(self.scales, dtype=np.float64),
        }

    @classmethod
    def from_sections(cls, sections: dict[str, np.ndarray]) -> "BcqCode":
        return cls(
            bases=tuple(BitMatrix.from_dense(b.astype(np.uint8)) for b in sections["bases"]),
            scales=tuple(float(a) for a in sections["scales"]),
        )


def _refit_scales(target: np.ndarray, signs: np.ndarray) -> np.ndarray:
    design = signs.reshape(len(signs), -1).T
    scales, *_ = np.linalg.lstsq(design, target, rcond=None)
    return scales


def _reselect_signs(target: np.ndarray, scales: np.ndarray) -> np.ndarray:
    """Per element, the sign pattern whose weighted sum is nearest to the target."""
    patterns = np.array(list(product((-1.0, 1.0), repeat=len(scales))))
    values = patterns @ scales
    order = np.argsort(values, kind="stable")
    sorted_values = values[order]
    right = np.clip(np.searchsorted(sorted_values, target), 1, len(values) - 1)
    left = right - 1
    nearer_left = np.abs(target - sorted_values[left]) <= np.abs(
        sorted_values[right] - target
    )
    chosen = order[np.where(nearer_left, left, right)]
    return patterns[chosen].T


def bcq(w, p: int) -> BcqCode:
    """Greedy residual fitting with one alternating refinement pass per round.

    Each round adds B = sgn(residual) with a = mean|residual|. The refinement then refits
    all scales by least squares, re-picks every element's sign pattern exhaustively for
    those scales and refits the scales once more. Every step can only lower the error, so
    the residual norm is non-increasing across rounds. Scales are made non-negative by
    flipping the matching basis.

    Raises:
        MatrixError: When p < 1
        ConfigError: When p exceeds MAX_BCQ_ROUNDS
    """
    if p < 1:
        msg = f"p must be at least 1, got {p}"
        raise MatrixError(msg)
    if p > MAX_BCQ_ROUNDS:
        msg = f"p={p} exceeds the BCQ limit of {MAX_BCQ_ROUNDS} rounds"
        raise ConfigError(msg)
    w = as_dense(w)
    target = w.ravel()
    signs = np.empty((0, target.size))
    scales = np.empty(0)
    residual = target.copy()

    for round_index in range(p):
        signs = np.vstack([signs, sgn(residual)])
        scales = np.append(scales, np.mean(np.abs(residual)))
        scales = _refit_scales(target, signs)
        signs = _reselect_signs(target, scales)
        scales = _refit_scales(target, signs)
        flip = scales < 0
        scales[flip] = -scales[flip]
        signs[flip] = -signs[flip]
        residual = target - scales @ signs
        logger.debug(
            f"BCQ round {round_index + 1}/{p}: residual norm {np.linalg.norm(residual):.6g}"
        )

    bases = tuple(
        BitMatrix.from_dense((row.reshape(w.shape) > 0).astype(np.uint8)) for row in signs
    )
    return BcqCode(bases=bases, scales=tuple(float(a) for a in scales))


def bcq_as_bqq(code: BcqCode) -> BqqCode:
    """Rewrite a one-round BCQ code as an equivalent single-stack BQQ code.

    a*B with B = 2X - 1 equals 2a*X@I - a*1, so the bits X become one factor and the
    identity the other, with l = max(m, n).
    """
    if code.p != 1:
        msg = f"only one-round BCQ codes map onto one stack, got p={code.p}"
        raise MatrixError(msg)
    m, n = code.shape
    bits = code.bases[0]
    a = code.scales[0]
    if n >= m:
        y, z = bits, BitMatrix.from_dense(np.eye(n, dtype=np.uint8))
    else:
        y, z = BitMatrix.from_dense(np.eye(m, dtype=np.uint8)), bits
    stack = BqqStack(y=y, z=z, r=2.0 * a, u=-a)
    return BqqCode(stacks=(stack,), u_total=-a, shape=(m, n), l=max(m, n))
