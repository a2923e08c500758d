"""Approximation bound for one stack and the inference-cost model of a BQQ layer."""

from dataclasses import dataclass

import numpy as np

from ..errors import MatrixError
from ..matrix import as_dense, sgn
from .subproblem import l_sub, sfo


def _truncated(w: np.ndarray, l: int):  # noqa: E741
    if not 1 <= l < min(w.shape):
        msg = f"l must be in [1, {min(w.shape) - 1}] for a {w.shape} matrix, got {l}"
        raise MatrixError(msg)
    u, s, vt = np.linalg.svd(w, full_matrices=False)
    return u[:, :l], s, vt[:l]


def sign_svd_feasible_point(w, l: int) -> tuple[np.ndarray, np.ndarray]:  # noqa: E741
    """Binary factors Y = (sgn U_l + 1)/2 and Z = (sgn V_l^T + 1)/2.

    (2Y - 1)(2Z - 1) is the sign pattern used by ``error_upper_bound``, which one stack
    represents exactly with r = 4a, s = t = -2a and u = l*a.
    """
    u, _, vt = _truncated(as_dense(w), l)
    return (sgn(u) + 1.0) / 2.0, (sgn(vt) + 1.0) / 2.0


def error_upper_bound(w, l: int) -> float:  # noqa: E741
    """Upper bound on the best single-stack error sqrt(min L_sub).

    The rank-l truncation tail plus the distance from the truncation W_l to its best
    multiple of P = sgn(U_l) sgn(V_l^T).

    Raises:
        MatrixError: If l is not below min(m, n)
    """
    w = as_dense(w)
    u, s, vt = _truncated(w, l)
    tail = float(np.sqrt(np.sum(s[l:] ** 2)))
    w_l = (u * s[:l]) @ vt
    pattern = sgn(u) @ sgn(vt)
    energy = float(np.sum(pattern**2))
    alpha = float(np.sum(w_l * pattern)) / energy if energy else 0.0
    return tail + float(np.linalg.norm(w_l - alpha * pattern))


def feasible_point_error(w, l: int) -> float:  # noqa: E741
    """sqrt(L_sub) of the sign-SVD binaries with their optimal scalars."""
    w = as_dense(w)
    y, z = sign_svd_feasible_point(w, l)
    return float(np.sqrt(l_sub(w, y, z, sfo(y, z, w))))


@dataclass(frozen=True)
class CostReport:
    """Operation counts of a first-order quantized layer and of a BQQ layer."""

    foq_and: int
    foq_add: int
    foq_mul: int
    bqq_and: int
    bqq_add: int
    bqq_mul: int
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def _weighted(self, counts: tuple[int, int, int]) -> float:
        return float(np.dot(self.weights, counts))

    @property
    def foq_cost(self) -> float:
        return self._weighted((self.foq_and, self.foq_add, self.foq_mul))

    @property
    def bqq_cost(self) -> float:
        return self._weighted((self.bqq_and, self.bqq_add, self.bqq_mul))

    @property
    def ratio(self) -> float:
        return self.bqq_cost / self.foq_cost


def inference_cost(
    m: int,
    n: int,
    l: int,  # noqa: E741
    d: int = 1,
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> CostReport:
    """Binary-activation operation counts for one bit plane against one stack.

    First order: mnd AND, md(n-1) ADD, md MUL.
    BQQ: ld(m+n) AND, d[(m+n+1)l + n - m - 2] ADD, 3ld MUL.
    """
    if min(m, n, l, d) < 1:
        msg = f"m, n, l and d must be positive, got {m}, {n}, {l}, {d}"
        raise MatrixError(msg)
    return CostReport(
        foq_and=m * n * d,
        foq_add=m * d * (n - 1),
        foq_mul=m * d,
        bqq_and=l * d * (m + n),
        bqq_add=d * ((m + n + 1) * l + n - m - 2),
        bqq_mul=3 * l * d,
        weights=tuple(float(x) for x in weights),
    )
