import json
import math

import numpy as np
import pytest
from scipy.stats import invgamma

from mnlpm import (
    Hyperparameters,
    ModelVariant,
    ParameterState,
    elicit,
    elicitation_table_row,
    erdos_renyi,
    interaction_probability,
    log_likelihood,
    log_prior,
    mean_latent_distance,
    prior_predictive_probabilities,
    sample_prior,
)
from mnlpm.model import (
    IFLPM_SIGMA2,
    IFLPM_TAU2,
    log_invgamma_pdf,
    std_normal_cdf,
    std_normal_quantile,
)


class TestNormalCdf:
    def test_against_erf(self):
        # independent route through math.erf
        for x in np.linspace(-8, 8, 81):
            expected = 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))
            assert abs(float(std_normal_cdf(x)) - expected) < 1e-9

    def test_quantile_inverts_cdf(self):
        for p in (1e-6, 0.01, 0.1, 0.5, 0.9, 0.999999):
            assert abs(float(std_normal_cdf(std_normal_quantile(p))) - p) < 1e-12

    def test_frozen_decile(self):
        assert std_normal_quantile(0.1) == pytest.approx(-1.2815515655446004,
                                                         abs=1e-12)

    def test_quantile_domain(self):
        with pytest.raises(ValueError):
            std_normal_quantile(0.0)
        with pytest.raises(ValueError):
            std_normal_quantile(1.0)


class TestMeanLatentDistance:
    def test_against_monte_carlo(self):
        # independent oracle: brute-force draws of ||u - u'||
        rng = np.random.default_rng(2024)
        n = 200_000
        for K in (1, 2, 3, 5):
            u = rng.normal(0, 1.0 / 3.0, size=(n, K))
            u2 = rng.normal(0, 1.0 / 3.0, size=(n, K))
            d = np.linalg.norm(u - u2, axis=1)
            mean, sd = mean_latent_distance(K)
            se = d.std() / math.sqrt(n)
            assert abs(mean - d.mean()) < 4 * se
            assert abs(sd - d.std()) < 0.01

    def test_frozen_k3(self):
        mean, sd = mean_latent_distance(3)
        assert mean == pytest.approx(0.752, abs=5e-4)
        assert sd == pytest.approx(0.317, abs=5e-4)


class TestElicitation:
    def test_k3_row(self):
        row = elicitation_table_row(elicit(3))
        assert row["b_zeta"] == pytest.approx(3.009, abs=1e-3)
        assert row["b_theta"] == pytest.approx(1.066, abs=1e-3)
        assert row["b_sigma"] == pytest.approx(0.074, abs=1e-3)
        assert row["b_kappa"] == pytest.approx(0.074, abs=1e-3)
        assert row["v_zeta"] == pytest.approx(1.227, abs=1e-3)
        assert row["v_theta"] == pytest.approx(0.730, abs=1e-3)
        assert row["v_nu"] == pytest.approx(0.192, abs=1e-3)

    def test_variance_split_identities(self):
        for K in range(1, 7):
            h = elicit(K)
            assert h.v2_zeta == pytest.approx(h.b_zeta / 2.0)
            assert h.v2_theta == pytest.approx(h.b_theta / 2.0)
            assert h.b_sigma == h.b_kappa == pytest.approx(2.0 / 27.0)
            assert h.v2_nu == pytest.approx(1.0 / 27.0)
            assert h.a_sigma == h.a_zeta == h.a_theta == h.a_kappa == 3.0

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            elicit(0)
        with pytest.raises(ValueError):
            elicit(2, theta0=0.6)
        with pytest.raises(ValueError):
            elicit(2, theta0=0.0)

    def test_json_round_trip(self):
        h = elicit(4, 0.05)
        assert Hyperparameters.from_json(h.to_json()) == h

    def test_json_field_names(self):
        d = json.loads(elicit(2).to_json())
        assert {"K", "theta0", "a_sigma", "b_sigma", "a_zeta", "b_zeta",
                "a_theta", "b_theta", "a_kappa", "b_kappa", "m_zeta",
                "m_theta", "v2_zeta", "v2_theta", "m_nu", "v2_nu"} == set(d)

    def test_hyperparameter_validation(self):
        with pytest.raises(ValueError):
            Hyperparameters(K=2, theta0=0.1, a_sigma=3, b_sigma=-1, a_zeta=3,
                            b_zeta=1, a_theta=3, b_theta=1, a_kappa=3,
                            b_kappa=1, m_zeta=0, m_theta=0, v2_zeta=1,
                            v2_theta=1, m_nu=(0, 0), v2_nu=1)
        with pytest.raises(ValueError):
            Hyperparameters(K=2, theta0=0.1, a_sigma=3, b_sigma=1, a_zeta=3,
                            b_zeta=1, a_theta=3, b_theta=1, a_kappa=3,
                            b_kappa=1, m_zeta=0, m_theta=0, v2_zeta=1,
                            v2_theta=1, m_nu=(0,), v2_nu=1)  # m_nu length


def two_actor_state(zeta=0.5, theta=0.2, d=1.0, K=1):
    u = np.zeros((2, 1, K))
    u[1, 0, 0] = d
    return ParameterState(np.array([zeta]), np.array([theta]), u,
                          np.zeros((2, K)), IFLPM_SIGMA2, 0.0, IFLPM_TAU2,
                          0.0, IFLPM_TAU2, np.zeros(K), 1.0)


class TestLikelihood:
    def test_hand_computed_single_dyad(self):
        state = two_actor_state()
        adj = np.zeros((2, 2, 1), dtype=np.uint8)
        adj[0, 1, 0] = adj[1, 0, 0] = 1
        net = __import__("mnlpm").MultilayerNetwork(adj, None)
        p = float(std_normal_cdf(0.5 - math.exp(0.2) * 1.0))
        assert log_likelihood(state, "IFLPM", net) == pytest.approx(math.log(p))

    def test_masked_dyads_excluded(self):
        state = two_actor_state()
        adj = np.zeros((2, 2, 1), dtype=np.uint8)
        mask = np.zeros((2, 2, 1), dtype=bool)
        net = __import__("mnlpm").MultilayerNetwork(adj, mask)
        assert log_likelihood(state, "IFLPM", net) == 0.0

    def test_actor_permutation_invariance(self):
        rng = np.random.default_rng(5)
        net = erdos_renyi(9, 3, 0.4, seed=4)
        state = sample_prior(elicit(2), 9, 3, rng=rng)
        base = log_likelihood(state, "MNLPM", net)
        perm = rng.permutation(9)
        permuted_net = net.relabeled(perm)
        permuted = ParameterState(
            state.zeta, state.theta, state.u[perm], state.eta[perm],
            state.sigma2, state.mu_zeta, state.tau2_zeta, state.mu_theta,
            state.tau2_theta, state.nu, state.kappa2,
        )
        assert log_likelihood(permuted, "MNLPM", permuted_net) == pytest.approx(
            base, abs=1e-10)

    def test_interaction_probability_symmetry(self):
        state = sample_prior(elicit(2), 6, 2, seed=1)
        for j in range(2):
            for i in range(6):
                for i2 in range(i + 1, 6):
                    assert interaction_probability(state, "MNLPM", i, i2, j) == \
                        interaction_probability(state, "MNLPM", i2, i, j)

    def test_diagonal_rejected(self):
        state = sample_prior(elicit(1), 3, 1, seed=0)
        with pytest.raises(ValueError):
            interaction_probability(state, "MNLPM", 1, 1, 0)


class TestPrior:
    def test_invgamma_pdf_against_scipy(self):
        for x, a, b in ((0.5, 3.0, 2.0), (2.0, 1.5, 0.7), (0.1, 3.0, 0.074)):
            expected = invgamma.logpdf(x, a, scale=b)
            assert log_invgamma_pdf(x, a, b) == pytest.approx(expected, abs=1e-10)
        assert log_invgamma_pdf(-1.0, 3.0, 2.0) == -math.inf

    @pytest.mark.parametrize("variant", ["MNLPM", "IFLPM", "GMLPM"])
    def test_log_prior_finite(self, variant):
        state = sample_prior(elicit(2), 5, 3, variant=variant, seed=7)
        if ModelVariant(variant).shares_positions:
            state.u = state.u[:, :1, :]
        assert math.isfinite(log_prior(state, variant, elicit(2)))

    def test_n_parameters_formula(self):
        state = sample_prior(elicit(3), 14, 4, seed=0)
        I, J, K = 14, 4, 3
        assert state.n_parameters() == I * K * (J + 1) + 2 * J + K + 6 == 227


class TestPriorSimulation:
    def test_shapes_per_variant(self):
        h = elicit(2)
        mn = sample_prior(h, 6, 3, "MNLPM", seed=1)
        assert mn.u.shape == (6, 3, 2) and mn.eta.shape == (6, 2)
        gm = sample_prior(h, 6, 3, "GMLPM", seed=1)
        assert gm.u.shape == (6, 1, 2)
        fl = sample_prior(h, 6, 3, "IFLPM", seed=1)
        assert fl.sigma2 == IFLPM_SIGMA2 and fl.tau2_zeta == IFLPM_TAU2
        assert np.all(fl.eta == 0)

    def test_seeded_reproducibility(self):
        a = sample_prior(elicit(2), 5, 2, seed=42)
        b = sample_prior(elicit(2), 5, 2, seed=42)
        assert np.array_equal(a.u, b.u) and a.sigma2 == b.sigma2

    def test_marginal_position_variance(self):
        # the three-way variance split recombines to roughly 1/9 per coordinate
        h = elicit(1)
        draws = np.array([sample_prior(h, 1, 1, seed=s).u[0, 0, 0]
                          for s in range(4000)])
        assert draws.var() == pytest.approx(1.0 / 9.0, rel=0.25)

    def test_prior_predictive_output(self):
        p = prior_predictive_probabilities(elicit(2), 500, seed=3)
        assert p.shape == (500,)
        assert np.all((p >= 0) & (p <= 1))
        with pytest.raises(ValueError):
            prior_predictive_probabilities(elicit(2), 0)
