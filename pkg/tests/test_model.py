import numpy as np
import pytest

from cournotprox import (
    AffineCost,
    Direction,
    LogCost,
    MarketInstance,
    apply_B,
    apply_Btilde,
    apply_Q,
    dphi_directional,
    grad_gamma,
    lipschitz_gamma,
    phi_bifunction,
    potential_gamma,
    psi_bifunction,
)
from cournotprox.experiments import exp_cost_market, log_cost_market


def zero_cost_instance(n, beta=0.1, alpha0=10.0, lower=0.0, upper=10.0, mu=0.0):
    return MarketInstance(
        beta=beta, alpha0=alpha0, mu=mu, lower=lower, upper=upper,
        cost=AffineCost(mu_h=np.zeros(n)),
    )


def dense_btilde(inst):
    n = inst.n
    return inst.beta * (np.ones((n, n)) - np.eye(n))


def dense_q(inst):
    n = inst.n
    return 2.0 * inst.beta * np.eye(n) + dense_btilde(inst)


class TestOperators:
    def test_own_output_operator(self):
        inst = zero_cost_instance(2)
        np.testing.assert_allclose(apply_B(inst, [1.0, 2.0]), [0.2, 0.4])

    def test_own_output_operator_single_firm(self):
        inst = zero_cost_instance(1, beta=0.5)
        np.testing.assert_allclose(apply_B(inst, [3.0]), [3.0])

    def test_operators_vanish_at_zero(self):
        inst = zero_cost_instance(4)
        np.testing.assert_array_equal(apply_B(inst, np.zeros(4)), np.zeros(4))
        np.testing.assert_array_equal(apply_Btilde(inst, np.zeros(4)), np.zeros(4))

    def test_coupling_operator(self):
        inst = zero_cost_instance(3)
        np.testing.assert_allclose(apply_Btilde(inst, [1.0, 2.0, 3.0]), [0.5, 0.4, 0.3])

    def test_coupling_vanishes_for_single_firm(self):
        inst = zero_cost_instance(1)
        np.testing.assert_array_equal(apply_Btilde(inst, [7.0]), [0.0])

    def test_coupling_swaps_pair(self):
        inst = zero_cost_instance(2, beta=1.0)
        np.testing.assert_allclose(apply_Btilde(inst, [1.0, 1.0]), [1.0, 1.0])

    def test_matches_dense_matrix_product(self):
        rng = np.random.default_rng(7)
        for n in (1, 2, 5, 17, 50):
            inst = zero_cost_instance(n, beta=0.3)
            x = rng.uniform(-4.0, 9.0, n)
            np.testing.assert_allclose(apply_Btilde(inst, x), dense_btilde(inst) @ x, atol=1e-12)
            np.testing.assert_allclose(apply_Q(inst, x), dense_q(inst) @ x, atol=1e-12)

    def test_dimension_mismatch_rejected(self):
        inst = zero_cost_instance(3)
        with pytest.raises(ValueError):
            apply_B(inst, [1.0, 2.0])
        with pytest.raises(ValueError):
            apply_Btilde(inst, np.ones(4))

    def test_batched_evaluation(self):
        inst = zero_cost_instance(3)
        X = np.arange(12.0).reshape(4, 3)
        rows = np.stack([apply_Btilde(inst, x) for x in X])
        np.testing.assert_allclose(apply_Btilde(inst, X), rows)


class TestSpectrum:
    @pytest.mark.parametrize("n", [2, 3, 6])
    def test_combined_operator_extreme_eigenvalues(self, n):
        inst = zero_cost_instance(n, beta=0.4)
        eigs = np.linalg.eigvalsh(dense_q(inst))
        assert eigs[0] == pytest.approx(inst.beta, abs=1e-12)
        assert eigs[-1] == pytest.approx(inst.beta * (n + 1), abs=1e-12)

    def test_combined_operator_single_firm_eigenvalue(self):
        # with one firm the coupling vanishes and 2*beta = beta*(n+1) is the
        # only eigenvalue
        inst = zero_cost_instance(1, beta=0.4)
        eigs = np.linalg.eigvalsh(dense_q(inst))
        assert eigs[0] == eigs[-1] == pytest.approx(2 * inst.beta, abs=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 10, 50])
    def test_coupling_norm_matches_power_iteration(self, n):
        inst = zero_cost_instance(n, beta=0.25)
        M = dense_btilde(inst)
        # power iteration on M@M (PSD) converges for every n, including the
        # degenerate +/-beta spectrum at n=2
        v = np.full(n, 1.0) + 1e-3 * np.arange(n)
        v /= np.linalg.norm(v)
        MM = M @ M
        for _ in range(400):
            w = MM @ v
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break
            v = w / nw
        est = float(np.sqrt(v @ (MM @ v)))
        assert abs(est - inst.btilde_norm) <= 1e-8


class TestPotential:
    def test_value_at_zero_is_minus_fixed_cost(self):
        inst = log_cost_market(6, 3)
        assert potential_gamma(inst, np.zeros(6)) == pytest.approx(
            -float(inst.cost.value(np.zeros(6))), abs=1e-12
        )

    def test_single_firm_closed_form(self):
        inst = zero_cost_instance(1)
        # beta*x^2 - alpha_tilde*x at x=10
        assert potential_gamma(inst, [10.0]) == pytest.approx(-90.0, abs=1e-12)

    def test_difference_antisymmetry(self):
        inst = exp_cost_market(5, 11)
        rng = np.random.default_rng(0)
        x, y = rng.uniform(0, 10, 5), rng.uniform(0, 10, 5)
        d1 = potential_gamma(inst, x) - potential_gamma(inst, y)
        d2 = potential_gamma(inst, y) - potential_gamma(inst, x)
        assert d1 == pytest.approx(-d2, abs=1e-12)

    @pytest.mark.parametrize("make", [log_cost_market, exp_cost_market])
    def test_gradient_matches_finite_differences(self, make):
        inst = make(8, 21)
        rng = np.random.default_rng(5)
        step = 1e-5
        shifts = step * np.eye(8)
        for _ in range(100):
            x = rng.uniform(0.5, 9.5, 8)
            fd = (potential_gamma(inst, x + shifts) - potential_gamma(inst, x - shifts)) / (2 * step)
            g = grad_gamma(inst, x)
            assert np.linalg.norm(fd - g) <= 1e-6 * np.linalg.norm(g)

    def test_gradient_is_dense_product_form(self):
        inst = log_cost_market(7, 2)
        rng = np.random.default_rng(9)
        x = rng.uniform(0, 10, 7)
        expected = dense_q(inst) @ x - inst.alpha_tilde - inst.cost.gradient(x)
        np.testing.assert_allclose(grad_gamma(inst, x), expected, atol=1e-12)


class TestBifunctions:
    def test_phi_vanishes_on_diagonal(self):
        inst = log_cost_market(5, 4)
        rng = np.random.default_rng(1)
        for _ in range(50):
            x = rng.uniform(0, 10, 5)
            assert phi_bifunction(inst, x, x) == 0.0

    def test_phi_affine_single_firm_value(self):
        inst = zero_cost_instance(1)
        # (0 - 10)*(10 - 0) + 0.1*100 - 0 = -90
        assert phi_bifunction(inst, [0.0], [10.0]) == pytest.approx(-90.0, abs=1e-12)

    def test_psi_on_diagonal(self):
        inst = exp_cost_market(4, 8)
        rng = np.random.default_rng(2)
        x = rng.uniform(0, 10, 4)
        expected = inst.beta * x @ x - float(inst.cost.value(x))
        assert psi_bifunction(inst, x, x) == pytest.approx(expected, abs=1e-12)

    def test_psi_single_firm_value(self):
        inst = zero_cost_instance(1)
        assert psi_bifunction(inst, [0.0], [1.0]) == pytest.approx(-9.9, abs=1e-12)

    def test_psi_minus_phi_independent_of_y(self):
        inst = log_cost_market(6, 13)
        rng = np.random.default_rng(3)
        x = rng.uniform(0, 10, 6)
        Y = rng.uniform(0, 10, (200, 6))
        diff = psi_bifunction(inst, x, Y) - phi_bifunction(inst, x, Y)
        assert np.var(diff) < 1e-12
        assert diff[0] == pytest.approx(inst.beta * x @ x - float(inst.cost.value(x)), rel=1e-12)


class TestDirectionalSlope:
    def test_zero_direction(self):
        inst = log_cost_market(3, 6)
        assert dphi_directional(inst, [1.0, 2.0, 3.0], np.zeros(3)) == 0.0

    def test_positive_homogeneity(self):
        inst = exp_cost_market(4, 9)
        rng = np.random.default_rng(4)
        x = rng.uniform(0, 10, 4)
        d = rng.standard_normal(4)
        for t in (0.0, 0.5, 2.0, 7.0):
            assert dphi_directional(inst, x, t * d) == pytest.approx(
                t * dphi_directional(inst, x, d), rel=1e-12, abs=1e-12
            )

    def test_boundary_stationarity_certified_by_sign(self):
        cost = LogCost(c0=2.0, c=1.5, r=2.0, n=1)
        inst = MarketInstance(beta=0.1, alpha0=10.0, mu=0.0, lower=0.0, upper=10.0, cost=cost)
        val = dphi_directional(inst, [10.0], [-1.0])
        assert val == pytest.approx(-(0.2 * 10.0 - 10.0 - 3.0 / 21.0), rel=1e-12)
        assert val > 0  # moving into the box only increases the potential
        # brute-force grid oracle: the potential is minimized at the upper bound
        ts = np.linspace(0.0, 10.0, 100_001)
        vals = potential_gamma(inst, ts[:, None])
        assert np.argmin(vals) == ts.size - 1


class TestInstanceValidation:
    def test_rejects_bad_scalars(self):
        cost = AffineCost(mu_h=np.zeros(2))
        with pytest.raises(ValueError):
            MarketInstance(beta=0.0, alpha0=1.0, mu=0.0, lower=0.0, upper=1.0, cost=cost)
        with pytest.raises(ValueError):
            MarketInstance(beta=1.0, alpha0=-1.0, mu=0.0, lower=0.0, upper=1.0, cost=cost)

    def test_rejects_bad_vectors(self):
        cost = AffineCost(mu_h=np.zeros(2))
        with pytest.raises(ValueError):
            MarketInstance(beta=1.0, alpha0=1.0, mu=[-1.0, 0.0], lower=0.0, upper=1.0, cost=cost)
        with pytest.raises(ValueError):
            MarketInstance(beta=1.0, alpha0=1.0, mu=0.0, lower=2.0, upper=1.0, cost=cost)
        with pytest.raises(ValueError):
            MarketInstance(beta=1.0, alpha0=1.0, mu=np.zeros(3), lower=0.0, upper=1.0, cost=cost)

    def test_rejects_box_outside_cost_domain(self):
        cost = LogCost(c0=0.0, c=1.0, r=2.0, n=1)
        with pytest.raises(ValueError):
            MarketInstance(beta=1.0, alpha0=1.0, mu=0.0, lower=-1.0, upper=1.0, cost=cost)

    def test_instance_arrays_are_readonly(self):
        inst = zero_cost_instance(3)
        with pytest.raises(ValueError):
            inst.lower[0] = -1.0
        with pytest.raises(ValueError):
            inst.alpha_tilde[0] = 0.0

    def test_lipschitz_constant_combines_cost_and_coupling(self):
        inst = log_cost_market(10, 0)
        assert lipschitz_gamma(inst) == pytest.approx(inst.cost.lipschitz_L() + 0.9, rel=1e-12)


class TestDirection:
    def test_toward_and_unit(self):
        d = Direction.toward([0.0, 0.0], [3.0, 4.0], t=2.0)
        np.testing.assert_allclose(d.d, [6.0, 8.0])
        np.testing.assert_allclose(d.unit().d, [0.6, 0.8])

    def test_rejects_negative_scale_and_zero_unit(self):
        with pytest.raises(ValueError):
            Direction.toward([0.0], [1.0], t=-1.0)
        with pytest.raises(ValueError):
            Direction(np.zeros(2)).unit()
