"""Polynomial unconstrained binary optimization and its annealed mean-field solver.

A problem exposes its energy on binary vertices, the multilinear extension of that energy
on the unit cube, and the gradient of the extension. The solver minimises the mean-field
KL objective by accelerated, clipped gradient steps while the temperature is annealed
linearly from ``T_init`` to ``T_fin``.
"""

import os
from collections.abc import Callable
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.special import logsumexp, xlogy

from .config import (
    DEFAULT_ETA,
    DEFAULT_N_STEP,
    DEFAULT_T_FIN,
    DEFAULT_T_INIT,
    DEFAULT_ZETA,
    LOG_EVERY_STEPS,
    MAX_ENUMERATION_VARS,
    logger,
)
from .errors import SolverError
from .matrix import make_rng

# Energies of this many enumerated states are evaluated per batch
ENUMERATION_CHUNK = 1 << 16


@dataclass(frozen=True)
class PuboProblem:
    """A PUBO instance over ``num_vars`` binary variables.

    Attributes:
        num_vars: Number of binary variables N
        energy: L(s) for s in {0,1}^N
        mean_field_energy: Multilinear extension L(x) for x in [0,1]^N
        gradient: Gradient of the multilinear extension
        vectorized: True when ``energy`` accepts a (k, N) batch and returns k energies
    """

    num_vars: int
    energy: Callable[[np.ndarray], float | np.ndarray]
    mean_field_energy: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    vectorized: bool = False


class PolynomialPubo:
    """Sparse polynomial over binary variables: {(i1<...<ik): J} plus a constant."""

    def __init__(
        self,
        num_vars: int,
        terms: dict[tuple[int, ...], float],
        constant: float = 0.0,
    ):
        if num_vars < 1:
            msg = f"num_vars must be positive, got {num_vars}"
            raise SolverError(msg)
        self.num_vars = num_vars
        self.constant = float(constant)
        self.terms: dict[tuple[int, ...], float] = {}
        for key, coefficient in terms.items():
            index = tuple(sorted(set(key)))
            if not index or index[0] < 0 or index[-1] >= num_vars:
                msg = f"term {key} out of range for {num_vars} variables"
                raise SolverError(msg)
            self.terms[index] = self.terms.get(index, 0.0) + float(coefficient)

    @property
    def degree(self) -> int:
        return max((len(index) for index in self.terms), default=0)

    def energy(self, s: np.ndarray) -> float | np.ndarray:
        """Evaluate on one assignment (N,) or a batch (k, N)."""
        s = np.asarray(s, dtype=np.float64)
        total = np.full(s.shape[:-1], self.constant)
        for index, coefficient in self.terms.items():
            total = total + coefficient * np.prod(s[..., list(index)], axis=-1)
        return float(total) if total.ndim == 0 else total

    # Multilinear: the same polynomial evaluated at expectations
    mean_field_energy = energy

    def gradient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        grad = np.zeros(self.num_vars)
        for index, coefficient in self.terms.items():
            values = x[list(index)]
            for position, var in enumerate(index):
                grad[var] += coefficient * np.prod(np.delete(values, position))
        return grad

    def as_problem(self) -> PuboProblem:
        return PuboProblem(
            num_vars=self.num_vars,
            energy=self.energy,
            mean_field_energy=self.mean_field_energy,
            gradient=self.gradient,
            vectorized=True,
        )


def random_pubo(
    num_vars: int, degree: int, seed: int, density: float = 1.0, scale: float = 1.0
) -> PolynomialPubo:
    """Random polynomial with Gaussian coefficients on every monomial up to ``degree``.

    Each monomial is kept with probability ``density``.
    """
    rng = make_rng(seed)
    terms = {}
    for order in range(1, degree + 1):
        for index in combinations(range(num_vars), order):
            if rng.random() < density:
                terms[index] = scale * rng.standard_normal()
    return PolynomialPubo(num_vars, terms)


@dataclass(frozen=True)
class MeanFieldState:
    """Current and previous expectations plus the current temperature."""

    x_cur: np.ndarray
    x_old: np.ndarray
    temperature: float

    def __post_init__(self):
        for name in ("x_cur", "x_old"):
            values = getattr(self, name)
            if np.any(values < 0.0) or np.any(values > 1.0):
                msg = f"{name} has coordinates outside [0, 1]"
                raise SolverError(msg)

    @classmethod
    def centered(cls, num_vars: int, temperature: float) -> "MeanFieldState":
        """All expectations at 0.5 with zero momentum."""
        half = np.full(num_vars, 0.5)
        return cls(x_cur=half, x_old=half.copy(), temperature=temperature)

    def binarize(self) -> np.ndarray:
        """Round to the more probable value; 0.5 rounds up."""
        return (self.x_cur >= 0.5).astype(np.float64)  # noqa: PLR2004


@dataclass(frozen=True)
class AnnealParams:
    """Annealing schedule and step sizes.

    Attributes:
        t_init: Initial temperature
        t_fin: Final temperature
        n_step: Number of AMFD iterations
        eta: Learning rate
        zeta: Accelerating rate of the forward point
    """

    t_init: float = DEFAULT_T_INIT
    t_fin: float = DEFAULT_T_FIN
    n_step: int = DEFAULT_N_STEP
    eta: float = DEFAULT_ETA
    zeta: float = DEFAULT_ZETA

    def __post_init__(self):
        if self.n_step < 1:
            msg = f"n_step must be positive, got {self.n_step}"
            raise SolverError(msg)
        if not self.t_init >= self.t_fin > 0:
            msg = f"need t_init >= t_fin > 0, got {self.t_init} and {self.t_fin}"
            raise SolverError(msg)

    @property
    def delta_t(self) -> float:
        """Linear temperature decrement per step (0 for a single step)."""
        if self.n_step == 1:
            return 0.0
        return (self.t_init - self.t_fin) / (self.n_step - 1)

    @classmethod
    def auto_detect(cls, **overrides) -> "AnnealParams":
        """Defaults with BQQ_* environment overrides; explicit non-None kwargs win."""
        env = {
            "t_init": float(os.getenv("BQQ_T_INIT", str(DEFAULT_T_INIT))),
            "t_fin": float(os.getenv("BQQ_T_FIN", str(DEFAULT_T_FIN))),
            "n_step": int(os.getenv("BQQ_STEPS", str(DEFAULT_N_STEP))),
            "eta": float(os.getenv("BQQ_ETA", str(DEFAULT_ETA))),
            "zeta": float(os.getenv("BQQ_ZETA", str(DEFAULT_ZETA))),
        }
        env.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**env)


def kl_divergence(
    x: np.ndarray,
    problem: PuboProblem,
    temperature: float,
    *,
    include_log_partition: bool = True,
) -> float:
    """KL divergence between the product distribution with marginals x and the
    canonical distribution exp(-L/T)/Z.

    With ``include_log_partition=False`` the constant ln Z is dropped, which leaves the
    objective the solver descends on.

    Raises:
        SolverError: If T <= 0, any x_i is not strictly inside (0, 1), or ln Z is
            requested for a problem too large to enumerate
    """
    if temperature <= 0:
        msg = f"temperature must be positive, got {temperature}"
        raise SolverError(msg)
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0.0) or np.any(x >= 1.0):
        msg = "entropy term is undefined unless every x_i is strictly inside (0, 1)"
        raise SolverError(msg)
    entropy = float(np.sum(xlogy(x, x) + xlogy(1.0 - x, 1.0 - x)))
    value = problem.mean_field_energy(x) / temperature + entropy
    if include_log_partition:
        energies = enumerate_energies(problem)
        value += float(logsumexp(-energies / temperature))
    return float(value)


def amfd_step(
    state: MeanFieldState, problem: PuboProblem, params: AnnealParams
) -> MeanFieldState:
    """One accelerated, clipped descent step followed by one temperature decrement."""
    x_cur, x_old = state.x_cur, state.x_old
    x_fwd = x_cur + params.zeta * (x_cur - x_old)
    phi = problem.gradient(x_fwd)
    # Second-order expansion of the entropy gradient around 0.5
    force = state.temperature * (x_cur - 0.5)
    x_new = np.clip(2.0 * x_cur - x_old - params.eta * (force + phi), 0.0, 1.0)
    return MeanFieldState(
        x_cur=x_new, x_old=x_cur, temperature=state.temperature - params.delta_t
    )


def anneal(
    problem: PuboProblem,
    params: AnnealParams,
    x_init: np.ndarray | None = None,
) -> tuple[MeanFieldState, np.ndarray]:
    """Run the full schedule and return the final state and its rounded assignment.

    Starts from ``x_init`` with zero momentum, or from the centre of the cube.
    """
    if x_init is None:
        state = MeanFieldState.centered(problem.num_vars, params.t_init)
    else:
        x0 = np.asarray(x_init, dtype=np.float64)
        state = MeanFieldState(x_cur=x0, x_old=x0.copy(), temperature=params.t_init)
    for step in range(params.n_step):
        state = amfd_step(state, problem, params)
        if (step + 1) % LOG_EVERY_STEPS == 0:
            logger.debug(
                f"AMFD step {step + 1}/{params.n_step}: T={state.temperature:.5f} "
                f"L(x)={problem.mean_field_energy(state.x_cur):.6g}"
            )
    return state, state.binarize()


def _all_states(num_vars: int, start: int, stop: int) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.int64)
    return ((codes[:, None] >> np.arange(num_vars)) & 1).astype(np.float64)


def enumerate_energies(problem: PuboProblem) -> np.ndarray:
    """Energies of all 2^N assignments; assignment k sets bit i of k into s_i.

    Raises:
        SolverError: If N exceeds the enumeration limit
    """
    n = problem.num_vars
    if n > MAX_ENUMERATION_VARS:
        msg = f"{n} variables exceed the enumeration limit of {MAX_ENUMERATION_VARS}"
        raise SolverError(msg)
    total = 1 << n
    energies = np.empty(total)
    for start in range(0, total, ENUMERATION_CHUNK):
        stop = min(start + ENUMERATION_CHUNK, total)
        states = _all_states(n, start, stop)
        if problem.vectorized:
            energies[start:stop] = problem.energy(states)
        else:
            energies[start:stop] = [problem.energy(s) for s in states]
    return energies


def brute_force_min(problem: PuboProblem) -> tuple[np.ndarray, float]:
    """Exhaustive global minimum; ties resolve to the lowest enumeration index."""
    energies = enumerate_energies(problem)
    best = int(np.argmin(energies))
    return _all_states(problem.num_vars, best, best + 1)[0], float(energies[best])
