import numpy as np
import pytest

from mnlpm import AdaptConfig, FitConfig, MultilayerNetwork, elicit, erdos_renyi, run_mcmc


def small_network(I=8, J=3, p=0.3, seed=11):
    return erdos_renyi(I, J, p, seed=seed)


def quick_config(variant="MNLPM", K=2, seed=0, n_burn=300, n_keep=200):
    return FitConfig(variant=variant, K=K, n_burn=n_burn, n_thin=1,
                     n_keep=n_keep, seed=seed, adapt=AdaptConfig())


@pytest.fixture(scope="session")
def tiny_net():
    return small_network()


@pytest.fixture(scope="session")
def tiny_fit(tiny_net):
    """A shared quick MNLPM fit reused by tests that only need plausible draws."""
    return run_mcmc(tiny_net, elicit(2), quick_config())


def planted_network(I, J, zeta, theta, positions, seed=0):
    """Binary network generated from explicit per-layer positions.

    ``positions`` has shape (I, J, K); edge probability follows the probit
    distance model with layer intercept ``zeta[j]`` and log-weight ``theta[j]``.
    """
    from scipy.special import ndtr

    rng = np.random.default_rng(seed)
    positions = np.asarray(positions, dtype=float)
    adj = np.zeros((I, I, J), dtype=np.uint8)
    iu, iv = np.triu_indices(I, k=1)
    for j in range(J):
        d = np.linalg.norm(positions[iu, j] - positions[iv, j], axis=1)
        p = ndtr(zeta[j] - np.exp(theta[j]) * d)
        draw = (rng.random(p.size) < p).astype(np.uint8)
        adj[iu, iv, j] = draw
        adj[iv, iu, j] = draw
    return MultilayerNetwork(adj, None)
