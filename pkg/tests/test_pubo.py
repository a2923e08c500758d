from itertools import product

import numpy as np
import pytest

from bqqkit.errors import SolverError
from bqqkit.matrix import make_rng
from bqqkit.pubo import (
    AnnealParams,
    MeanFieldState,
    PolynomialPubo,
    PuboProblem,
    amfd_step,
    anneal,
    brute_force_min,
    enumerate_energies,
    kl_divergence,
    random_pubo,
)


def enumerated_kl(x: np.ndarray, problem: PuboProblem, temperature: float) -> float:
    """KL(P_MF || P_C) summed state by state."""
    states = np.array(list(product((0.0, 1.0), repeat=problem.num_vars)))
    energies = np.array([problem.energy(s) for s in states])
    log_weights = -energies / temperature
    top = log_weights.max()
    log_p_c = log_weights - (top + np.log(np.sum(np.exp(log_weights - top))))
    p_mf = np.prod(np.where(states == 1.0, x, 1.0 - x), axis=1)
    return float(np.sum(p_mf * (np.log(p_mf) - log_p_c)))


def finite_difference(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    grad = np.empty_like(x)
    for i in range(len(x)):
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (f(x + step) - f(x - step)) / (2 * h)
    return grad


class TestPolynomialPubo:
    """Test the polynomial PUBO container."""

    def test_merges_duplicate_terms(self):
        """Test permuted keys accumulate into one monomial."""
        pubo = PolynomialPubo(3, {(0, 1): 1.0, (1, 0): 2.0, (2,): -1.0})
        assert pubo.terms == {(0, 1): 3.0, (2,): -1.0}
        assert pubo.degree == 2  # noqa: PLR2004

    def test_rejects_out_of_range_terms(self):
        """Test monomials must reference existing variables."""
        with pytest.raises(SolverError, match="out of range"):
            PolynomialPubo(2, {(0, 2): 1.0})

    def test_batch_energy(self):
        """Test batched evaluation equals one-by-one evaluation."""
        pubo = random_pubo(5, 3, seed=4)
        states = (make_rng(1).random((20, 5)) > 0.5).astype(float)
        np.testing.assert_allclose(pubo.energy(states), [pubo.energy(s) for s in states])

    def test_vertex_agreement(self):
        """Test the multilinear extension matches the energy on every vertex."""
        for seed in range(10):
            problem = random_pubo(6, 3, seed=seed).as_problem()
            for s in product((0.0, 1.0), repeat=6):
                s = np.array(s)
                assert problem.mean_field_energy(s) == problem.energy(s)

    def test_gradient_matches_finite_differences(self):
        """Test the analytic gradient at 100 random interior points."""
        rng = make_rng(11)
        for seed in range(100):
            problem = random_pubo(6, 3, seed=seed).as_problem()
            x = rng.uniform(0.05, 0.95, 6)
            numeric = finite_difference(problem.mean_field_energy, x)
            analytic = problem.gradient(x)
            assert np.linalg.norm(analytic - numeric) <= 1e-5 * max(
                1.0, np.linalg.norm(analytic)
            )


class TestKlDivergence:
    """Test the mean-field KL objective against enumeration."""

    def test_zero_energy_uniform(self):
        """Test the uniform product distribution matches a flat landscape."""
        problem = PolynomialPubo(1, {}).as_problem()
        assert kl_divergence(np.array([0.5]), problem, 0.3) == pytest.approx(0.0, abs=1e-12)

    def test_two_variable_product(self):
        """Test L(s) = s1 s2 at T = 1 from the centre."""
        problem = PolynomialPubo(2, {(0, 1): 1.0}).as_problem()
        x = np.array([0.5, 0.5])
        assert kl_divergence(x, problem, 1.0) == pytest.approx(
            enumerated_kl(x, problem, 1.0), abs=1e-12
        )

    def test_cubic_eight_variables(self):
        """Test a random cubic on 8 variables at T = 0.7."""
        problem = random_pubo(8, 3, seed=5).as_problem()
        x = make_rng(6).uniform(0.01, 0.99, 8)
        assert kl_divergence(x, problem, 0.7) == pytest.approx(
            enumerated_kl(x, problem, 0.7), abs=1e-9
        )

    def test_random_instances(self):
        """Test 100 instances with up to 10 variables and degree 3."""
        rng = make_rng(21)
        for seed in range(100):
            num_vars = 1 + seed % 10
            degree = 1 + seed % 3
            problem = random_pubo(num_vars, degree, seed=seed).as_problem()
            x = rng.uniform(0.01, 0.99, num_vars)
            temperature = float(rng.uniform(0.2, 2.0))
            assert kl_divergence(x, problem, temperature) == pytest.approx(
                enumerated_kl(x, problem, temperature), abs=1e-9
            )

    def test_without_log_partition(self):
        """Test dropping ln Z shifts the value by a constant."""
        problem = random_pubo(4, 2, seed=2).as_problem()
        a, b = np.full(4, 0.3), np.full(4, 0.6)
        full = kl_divergence(a, problem, 1.0) - kl_divergence(b, problem, 1.0)
        partial = kl_divergence(
            a, problem, 1.0, include_log_partition=False
        ) - kl_divergence(b, problem, 1.0, include_log_partition=False)
        assert full == pytest.approx(partial, abs=1e-12)

    def test_rejects_boundary_points(self):
        """Test x on a face of the cube is rejected."""
        problem = PolynomialPubo(2, {}).as_problem()
        with pytest.raises(SolverError, match="strictly inside"):
            kl_divergence(np.array([0.0, 0.5]), problem, 1.0)

    def test_rejects_non_positive_temperature(self):
        """Test T <= 0 is rejected."""
        problem = PolynomialPubo(1, {}).as_problem()
        with pytest.raises(SolverError, match="temperature"):
            kl_divergence(np.array([0.5]), problem, 0.0)


class TestAnnealParams:
    """Test schedule validation."""

    def test_delta(self):
        """Test the linear decrement."""
        params = AnnealParams(t_init=1.0, t_fin=0.1, n_step=10)
        assert params.delta_t == pytest.approx(0.1)

    def test_single_step(self):
        """Test a one-step schedule does not divide by zero."""
        assert AnnealParams(n_step=1).delta_t == 0.0

    def test_rejects_bad_temperatures(self):
        """Test T_init >= T_fin > 0 is enforced."""
        with pytest.raises(SolverError):
            AnnealParams(t_init=0.1, t_fin=0.2)
        with pytest.raises(SolverError):
            AnnealParams(t_fin=0.0)

    def test_auto_detect_env(self, monkeypatch):
        """Test BQQ_* variables override defaults and kwargs override both."""
        monkeypatch.setenv("BQQ_STEPS", "123")
        monkeypatch.setenv("BQQ_ETA", "0.5")
        params = AnnealParams.auto_detect(eta=0.01, zeta=None)
        assert params.n_step == 123  # noqa: PLR2004
        assert params.eta == 0.01  # noqa: PLR2004
        assert params.zeta == 4.0  # noqa: PLR2004


class TestAmfdStep:
    """Test the single-iteration update."""

    @pytest.fixture
    def flat(self):
        """Problem with zero gradient everywhere."""
        return PolynomialPubo(1, {}).as_problem()

    def test_centre_is_fixed(self):
        """Test x = 0.5 is a fixed point without gradient."""
        problem = PolynomialPubo(3, {}).as_problem()
        params = AnnealParams(t_init=1.0, t_fin=0.5, n_step=3)
        state = MeanFieldState.centered(3, 1.0)
        nxt = amfd_step(state, problem, params)
        np.testing.assert_array_equal(nxt.x_cur, 0.5)
        assert nxt.temperature == pytest.approx(0.75)

    def test_hand_evaluation(self, flat):
        """Test clip(0.8 - 0.1 * 1 * 0.3) = 0.77."""
        params = AnnealParams(t_init=1.0, t_fin=1.0, n_step=1, eta=0.1, zeta=0.0)
        state = MeanFieldState(np.array([0.8]), np.array([0.8]), 1.0)
        nxt = amfd_step(state, flat, params)
        assert nxt.x_cur[0] == pytest.approx(0.77)
        assert nxt.x_old[0] == 0.8  # noqa: PLR2004

    def test_stays_in_cube(self):
        """Test large steps are clipped to [0, 1]."""
        problem = random_pubo(6, 2, seed=1, scale=50.0).as_problem()
        params = AnnealParams(eta=1.0, zeta=4.0, n_step=200)
        state = MeanFieldState.centered(6, params.t_init)
        for _ in range(params.n_step):
            state = amfd_step(state, problem, params)
            assert np.all((state.x_cur >= 0) & (state.x_cur <= 1))

    def test_linear_energy_minimised(self):
        """Test L(s) = s1 + s2 drives both expectations to 0."""
        problem = PolynomialPubo(2, {(0,): 1.0, (1,): 1.0}).as_problem()
        params = AnnealParams(n_step=500)
        state, s = anneal(problem, params)
        assert np.all(state.x_cur < 0.1)  # noqa: PLR2004
        np.testing.assert_array_equal(s, [0.0, 0.0])

    def test_state_rejects_outside_cube(self):
        """Test invalid expectations are rejected."""
        with pytest.raises(SolverError):
            MeanFieldState(np.array([1.2]), np.array([0.5]), 1.0)

    def test_binarize_ties_round_up(self):
        """Test 0.5 rounds to 1."""
        state = MeanFieldState(np.array([0.5, 0.49, 0.51]), np.full(3, 0.5), 1.0)
        np.testing.assert_array_equal(state.binarize(), [1.0, 0.0, 1.0])


class TestBruteForce:
    """Test the exhaustive oracle."""

    def test_linear(self):
        """Test L(s) = s1."""
        s, energy = brute_force_min(PolynomialPubo(1, {(0,): 1.0}).as_problem())
        np.testing.assert_array_equal(s, [0.0])
        assert energy == 0.0

    def test_negative_cubic(self):
        """Test L(s) = -s1 s2 s3."""
        s, energy = brute_force_min(PolynomialPubo(3, {(0, 1, 2): -1.0}).as_problem())
        np.testing.assert_array_equal(s, [1.0, 1.0, 1.0])
        assert energy == -1.0

    def test_beats_sampling(self):
        """Test the minimum is below 1000 random assignments."""
        problem = random_pubo(10, 2, seed=3).as_problem()
        _, energy = brute_force_min(problem)
        samples = (make_rng(0).random((1000, 10)) > 0.5).astype(float)
        assert energy <= problem.energy(samples).min()

    def test_scalar_energy_problem(self):
        """Test enumeration of a problem without batched energies."""
        pubo = random_pubo(4, 2, seed=8)
        scalar = PuboProblem(4, pubo.energy, pubo.energy, pubo.gradient)
        np.testing.assert_allclose(
            enumerate_energies(scalar), enumerate_energies(pubo.as_problem())
        )

    def test_rejects_large_problems(self):
        """Test the enumeration limit."""
        problem = PolynomialPubo(25, {(0,): 1.0}).as_problem()
        with pytest.raises(SolverError, match="enumeration limit"):
            brute_force_min(problem)


@pytest.mark.slow
def test_annealing_solution_quality():
    """Rounded AMFD states land near the optimum on random 16-variable QUBOs."""
    params = AnnealParams(n_step=2000)
    close = 0
    for seed in range(50):
        pubo = random_pubo(16, 2, seed=seed)
        scale = max(abs(v) for v in pubo.terms.values())
        pubo = PolynomialPubo(16, {k: v / scale for k, v in pubo.terms.items()})
        problem = pubo.as_problem()
        _, best = brute_force_min(problem)
        _, s = anneal(problem, params)
        if problem.energy(s) <= best + 0.05 * abs(best):
            close += 1
    assert close >= 45  # noqa: PLR2004
