"""The single-stack subproblem: relaxed objective, its gradient and closed-form scales.

For a residual R (m x n) and factors Y (m x l), Z (l x n) the stack reconstructs

    rec = r*Y@Z + s*Y@1_Z + t*1_Y@Z + u*1

When Y and Z hold Bernoulli means instead of bits, ``l_pubo`` is the expected squared
error of that reconstruction. It is the squared error at the means plus the variance
corrections that vanish on binary inputs, because y*y = y there.
"""

from dataclasses import dataclass

import numpy as np

from ..config import SFO_RCOND
from ..errors import MatrixError
from ..pubo import PuboProblem


@dataclass(frozen=True)
class ScalingFactors:
    """Scalars r, s, t, u of one stack."""

    r: float = 0.0
    s: float = 0.0
    t: float = 0.0
    u: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.s, self.t, self.u])

    @classmethod
    def from_array(cls, values) -> "ScalingFactors":
        r, s, t, u = (float(v) for v in values)
        return cls(r=r, s=s, t=t, u=u)

    def scaled(self, factor: float) -> "ScalingFactors":
        return ScalingFactors.from_array(self.as_array() * factor)


@dataclass(frozen=True)
class SubproblemRelaxation:
    """Relaxed factors, the residual they fit and the scales last fitted to them."""

    y_hat: np.ndarray
    z_hat: np.ndarray
    residual: np.ndarray
    scales: ScalingFactors

    def __post_init__(self):
        for name in ("y_hat", "z_hat"):
            values = getattr(self, name)
            if np.any(values < 0.0) or np.any(values > 1.0):
                msg = f"{name} has entries outside [0, 1]"
                raise MatrixError(msg)


def _check_shapes(r: np.ndarray, y: np.ndarray, z: np.ndarray):
    if (
        y.ndim != 2  # noqa: PLR2004
        or z.ndim != 2  # noqa: PLR2004
        or y.shape[1] != z.shape[0]
        or r.shape != (y.shape[0], z.shape[1])
    ):
        msg = f"incompatible shapes: R {r.shape}, Y {y.shape}, Z {z.shape}"
        raise MatrixError(msg)


def reconstruct(y: np.ndarray, z: np.ndarray, f: ScalingFactors) -> np.ndarray:
    """r*Y@Z + s*Y@1_Z + t*1_Y@Z + u*1 for binary or relaxed factors."""
    row_sums = y.sum(axis=1, keepdims=True)
    col_sums = z.sum(axis=0, keepdims=True)
    return f.r * (y @ z) + f.s * row_sums + f.t * col_sums + f.u


def l_sub(r: np.ndarray, y: np.ndarray, z: np.ndarray, f: ScalingFactors) -> float:
    """Squared Frobenius error of one stack against the residual."""
    _check_shapes(r, y, z)
    return float(np.sum((r - reconstruct(y, z, f)) ** 2))


def l_pubo(r: np.ndarray, y: np.ndarray, z: np.ndarray, f: ScalingFactors) -> float:
    """Relaxed subproblem objective; equals ``l_sub`` on binary factors."""
    _check_shapes(r, y, z)
    m, n = r.shape
    ys, ys2 = y.sum(axis=0), (y * y).sum(axis=0)
    zs, zs2 = z.sum(axis=1), (z * z).sum(axis=1)
    corrections = (
        f.r**2 * (ys @ zs - ys2 @ zs2)
        + f.s**2 * n * (ys.sum() - ys2.sum())
        + f.t**2 * m * (zs.sum() - zs2.sum())
        + 2 * f.r * f.s * (ys @ zs - ys2 @ zs)
        + 2 * f.r * f.t * (ys @ zs - ys @ zs2)
    )
    return l_sub(r, y, z, f) + float(corrections)


def l_pubo_grad(
    r: np.ndarray, y: np.ndarray, z: np.ndarray, f: ScalingFactors
) -> tuple[np.ndarray, np.ndarray]:
    """Partial derivatives of ``l_pubo`` with respect to every entry of Y and Z."""
    _check_shapes(r, y, z)
    m, n = r.shape
    err = r - reconstruct(y, z, f)
    err_rows = err.sum(axis=1, keepdims=True)
    err_cols = err.sum(axis=0, keepdims=True)
    ys, ys2 = y.sum(axis=0), (y * y).sum(axis=0)
    zs, zs2 = z.sum(axis=1), (z * z).sum(axis=1)

    grad_y = -2.0 * (f.r * (err @ z.T) + f.s * err_rows)
    grad_y = grad_y + f.r**2 * (zs - 2.0 * y * zs2)
    grad_y = grad_y + f.s**2 * n * (1.0 - 2.0 * y)
    grad_y = grad_y + 2 * f.r * f.s * zs * (1.0 - 2.0 * y)
    grad_y = grad_y + 2 * f.r * f.t * (zs - zs2)

    grad_z = -2.0 * (f.r * (y.T @ err) + f.t * err_cols)
    grad_z = grad_z + f.r**2 * (ys[:, None] - 2.0 * z * ys2[:, None])
    grad_z = grad_z + f.t**2 * m * (1.0 - 2.0 * z)
    grad_z = grad_z + 2 * f.r * f.s * (ys - ys2)[:, None]
    grad_z = grad_z + 2 * f.r * f.t * ys[:, None] * (1.0 - 2.0 * z)
    return grad_y, np.broadcast_to(grad_z, z.shape).copy()


def sfo(y: np.ndarray, z: np.ndarray, r: np.ndarray) -> ScalingFactors:
    """Scales minimising ``l_pubo`` for fixed (possibly relaxed) factors.

    The objective is a convex quadratic in (r, s, t, u). Its normal equations are
    solved with a pseudo-inverse, so collinear designs (Y == 0, Z == 0, ...) yield the
    least-norm minimiser instead of failing.
    """
    _check_shapes(r, y, z)
    m, n = r.shape
    ys, ys2 = y.sum(axis=0), (y * y).sum(axis=0)
    zs, zs2 = z.sum(axis=1), (z * z).sum(axis=1)
    yz = y @ z
    row = np.broadcast_to(y.sum(axis=1, keepdims=True), (m, n))
    col = np.broadcast_to(z.sum(axis=0, keepdims=True), (m, n))
    features = (yz, row, col)

    gram = np.empty((4, 4))
    for i, a in enumerate(features):
        for j, b in enumerate(features[: i + 1]):
            gram[i, j] = gram[j, i] = np.sum(a * b)
        gram[i, 3] = gram[3, i] = a.sum()
    gram[3, 3] = m * n
    # Variance of each feature under independent Bernoulli factors
    gram[0, 0] += ys @ zs - ys2 @ zs2
    gram[1, 1] += n * (ys.sum() - ys2.sum())
    gram[2, 2] += m * (zs.sum() - zs2.sum())
    gram[0, 1] = gram[1, 0] = gram[0, 1] + ys @ zs - ys2 @ zs
    gram[0, 2] = gram[2, 0] = gram[0, 2] + ys @ zs - ys @ zs2

    rhs = np.array([np.sum(r * a) for a in features] + [r.sum()])
    theta = np.linalg.pinv(gram, rcond=SFO_RCOND, hermitian=True) @ rhs
    return ScalingFactors.from_array(theta)


def subproblem_pubo(r: np.ndarray, f: ScalingFactors, l: int) -> PuboProblem:  # noqa: E741
    """Expose the stack objective over the flattened (Y, Z) vector as a PUBO.

    The first m*l coordinates are Y in row-major order, the remaining l*n are Z.
    """
    m, n = r.shape
    split = m * l

    def unpack(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return x[:split].reshape(m, l), x[split:].reshape(l, n)

    def energy(s: np.ndarray) -> float:
        return l_sub(r, *unpack(np.asarray(s, dtype=np.float64)), f)

    def mean_field_energy(x: np.ndarray) -> float:
        return l_pubo(r, *unpack(np.asarray(x, dtype=np.float64)), f)

    def gradient(x: np.ndarray) -> np.ndarray:
        grad_y, grad_z = l_pubo_grad(r, *unpack(np.asarray(x, dtype=np.float64)), f)
        return np.concatenate([grad_y.ravel(), grad_z.ravel()])

    return PuboProblem(
        num_vars=split + l * n,
        energy=energy,
        mean_field_energy=mean_field_energy,
        gradient=gradient,
    )
