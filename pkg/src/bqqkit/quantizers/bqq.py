"""Greedy Binary Quadratic Quantization.

A matrix W (m x n) is approximated by p stacks

    W ~ sum_i (r_i Y_i Z_i + s_i Y_i 1_Z + t_i 1_Y Z_i) + u 1

with binary Y_i (m x l) and Z_i (l x n). Each stack is fitted to the residual left by the
previous ones by annealing a relaxed subproblem and re-solving the four scalars in closed
form after every step.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..config import SCALAR_BITS, logger
from ..errors import MatrixError
from ..matrix import (
    BitMatrix,
    MemoryFootprint,
    StandardizationRecord,
    as_dense,
    bqq_footprint,
    destandardize,
    make_rng,
    standardize,
)
from ..pubo import AnnealParams, MeanFieldState, amfd_step
from .subproblem import ScalingFactors, reconstruct, sfo, subproblem_pubo


@dataclass(frozen=True)
class BqqStack:
    """One (Y, Z, r, s, t, u) term of the decomposition."""

    y: BitMatrix
    z: BitMatrix
    r: float = 0.0
    s: float = 0.0
    t: float = 0.0
    u: float = 0.0

    def __post_init__(self):
        if self.y.cols != self.z.rows:
            msg = f"Y has {self.y.cols} columns but Z has {self.z.rows} rows"
            raise MatrixError(msg)

    @property
    def l(self) -> int:  # noqa: E743
        return self.y.cols

    @property
    def shape(self) -> tuple[int, int]:
        return self.y.rows, self.z.cols

    @property
    def scales(self) -> ScalingFactors:
        return ScalingFactors(r=self.r, s=self.s, t=self.t, u=self.u)

    def dequantize(self, *, include_bias: bool = True) -> np.ndarray:
        scales = self.scales if include_bias else ScalingFactors(self.r, self.s, self.t)
        return reconstruct(self.y.to_dense(), self.z.to_dense(), scales)


@dataclass(frozen=True)
class BqqCode:
    """Full BQQ representation of one matrix.

    Attributes:
        stacks: The p fitted stacks, in fitting order
        u_total: Sum of the per-stack biases; the only bias that is stored
        shape: (m, n) of the quantized matrix
        l: Intermediate dimension shared by all stacks
        standardization: Record to undo on dequantization, or None
        residual_norms: Frobenius norm of the residual after each stack (not stored)
    """

    stacks: tuple[BqqStack, ...]
    u_total: float
    shape: tuple[int, int]
    l: int  # noqa: E741
    standardization: StandardizationRecord | None = None
    residual_norms: tuple[float, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.stacks:
            msg = "a BQQ code needs at least one stack"
            raise MatrixError(msg)
        for index, stack in enumerate(self.stacks):
            if stack.shape != tuple(self.shape) or stack.l != self.l:
                msg = (
                    f"stack {index} has shape {stack.shape} and l={stack.l}, "
                    f"expected {tuple(self.shape)} and l={self.l}"
                )
                raise MatrixError(msg)
        stacked_bias = math.fsum(stack.u for stack in self.stacks)
        if not math.isclose(stacked_bias, self.u_total, rel_tol=1e-9, abs_tol=1e-9):
            msg = f"u_total={self.u_total} differs from the stack biases ({stacked_bias})"
            raise MatrixError(msg)

    @property
    def p(self) -> int:
        return len(self.stacks)

    def dequantize(self) -> np.ndarray:
        return dequantize(self)

    def footprint(self, scalar_bits: int = SCALAR_BITS) -> MemoryFootprint:
        m, n = self.shape
        return bqq_footprint(m, n, self.l, self.p, scalar_bits)


def intermediate_dim(m: int, n: int, l_scale: float = 1.0) -> int:
    """round(l_scale * m*n / (m+n)), halves rounded up, never below 1."""
    if m < 1 or n < 1 or l_scale <= 0:
        msg = f"need m, n >= 1 and l_scale > 0, got m={m} n={n} l_scale={l_scale}"
        raise MatrixError(msg)
    return max(1, math.floor(l_scale * m * n / (m + n) + 0.5))


def dequantize(code: BqqCode) -> np.ndarray:
    """Rebuild the matrix from its stacks and the total bias."""
    w = np.full(code.shape, code.u_total, dtype=np.float64)
    for stack in code.stacks:
        w += stack.dequantize(include_bias=False)
    if code.standardization is not None:
        w = destandardize(w, code.standardization)
    return w


def _split(x: np.ndarray, m: int, l: int, n: int) -> tuple[np.ndarray, np.ndarray]:  # noqa: E741
    return x[: m * l].reshape(m, l), x[m * l :].reshape(l, n)


def solve_subproblem(
    residual, params: AnnealParams, l: int, seed: int  # noqa: E741
) -> BqqStack:
    """Fit one stack to ``residual`` by annealed mean-field descent.

    The residual is divided by its range, the relaxed factors start from a seeded uniform
    draw, and each AMFD step is followed by a closed-form refit of the scalars. The
    factors are then rounded at 0.5 and the scalars refitted once more on the binaries
    before being scaled back by the range.
    """
    r = as_dense(residual, name="residual")
    m, n = r.shape
    value_range = float(r.max() - r.min())
    if value_range == 0.0:
        return BqqStack(
            y=BitMatrix.zeros(m, l), z=BitMatrix.zeros(l, n), u=float(r.flat[0])
        )
    rn = r / value_range

    rng = make_rng(seed)
    x_old = rng.random(m * l + l * n)
    x_cur = x_old - params.eta * (x_old - 0.5)
    state = MeanFieldState(x_cur=x_cur, x_old=x_old, temperature=params.t_init)
    scales = sfo(*_split(state.x_cur, m, l, n), rn)

    for _ in range(params.n_step):
        state = amfd_step(state, subproblem_pubo(rn, scales, l), params)
        scales = sfo(*_split(state.x_cur, m, l, n), rn)

    y, z = _split(state.binarize(), m, l, n)
    final = sfo(y, z, rn).scaled(value_range)
    return BqqStack(
        y=BitMatrix.from_dense(y),
        z=BitMatrix.from_dense(z),
        r=final.r,
        s=final.s,
        t=final.t,
        u=final.u,
    )


def bqq_quantize(
    w,
    p: int,
    l_scale: float = 1.0,
    params: AnnealParams | None = None,
    seed: int = 0,
    *,
    standardize_input: bool = False,
) -> BqqCode:
    """Greedy p-stack quantization; stack i is annealed with seed ``seed + i``.

    Args:
        w: Matrix to quantize
        p: Number of stacks (the pseudo bit width when l_scale is 1)
        l_scale: Multiplier on the default intermediate dimension
        params: Annealing schedule, defaults from ``AnnealParams.auto_detect()``
        seed: Base seed of the relaxed-factor initialisation
        standardize_input: Quantize the standardized matrix and attach the record

    Returns:
        The fitted code. ``residual_norms`` is non-increasing.
    """
    if p < 1:
        msg = f"p must be at least 1, got {p}"
        raise MatrixError(msg)
    w = as_dense(w)
    record = None
    if standardize_input:
        w, record = standardize(w)
    params = params or AnnealParams.auto_detect()
    m, n = w.shape
    l = intermediate_dim(m, n, l_scale)  # noqa: E741

    residual = w.copy()
    stacks, norms = [], []
    for index in range(p):
        stack = solve_subproblem(residual, params, l, seed + index)
        residual = residual - stack.dequantize()
        stacks.append(stack)
        norms.append(float(np.linalg.norm(residual)))
        logger.info(
            f"BQQ stack {index + 1}/{p} ({m}x{n}, l={l}): "
            f"residual norm {norms[-1]:.6g}"
        )

    return BqqCode(
        stacks=tuple(stacks),
        u_total=math.fsum(stack.u for stack in stacks),
        shape=(m, n),
        l=l,
        standardization=record,
        residual_norms=tuple(norms),
    )


def pseudo_bits(code: BqqCode) -> float:
    """Binary parameters per matrix element, the "pseudo p-bit" label of a code."""
    m, n = code.shape
    return code.p * code.l * (m + n) / (m * n)
