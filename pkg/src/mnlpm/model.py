"""Probability model for multilayer latent position networks.

Three variants share the probit edge probability
``Phi(zeta_j - exp(theta_j) * ||u_i - u_i2||)``:

* ``MNLPM`` -- per-layer positions ``u[i, j]`` shrunk toward actor-level
  averages ``eta[i]``, with a full hierarchy on intercepts, log-weights, and
  position means.
* ``IFLPM`` -- independent single-layer fits; population-level quantities are
  fixed constants (``tau2 = 3`` for intercepts and log-weights,
  ``sigma2 = 1/9`` for positions centred at the origin).
* ``GMLPM`` -- one shared position per actor across all layers, drawn around a
  population mean ``nu`` with variance ``kappa2``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy.special import gammaln, log_ndtr, ndtr, ndtri

# Fixed single-layer prior constants used by the IFLPM variant.
IFLPM_TAU2 = 3.0
IFLPM_SIGMA2 = 1.0 / 9.0


class ModelVariant(str, enum.Enum):
    MNLPM = "MNLPM"
    IFLPM = "IFLPM"
    GMLPM = "GMLPM"

    @property
    def shares_positions(self) -> bool:
        """True when one latent position per actor is shared across layers."""
        return self is ModelVariant.GMLPM

    @property
    def has_actor_means(self) -> bool:
        """True when the actor-average positions eta are part of the model."""
        return self is ModelVariant.MNLPM


def std_normal_cdf(x):
    """Standard Gaussian CDF (absolute error well below 1e-9 on |x| <= 8)."""
    return ndtr(x)


def std_normal_quantile(p):
    """Functional inverse of :func:`std_normal_cdf` on (0, 1)."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ValueError("quantile argument must lie strictly in (0, 1)")
    out = ndtri(p)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Hyperparameters:
    """Fixed constants of the hierarchical prior plus K and theta0.

    ``m_nu`` is a K-vector; every other field is a scalar.  ``v2_*`` fields
    are variances (the elicitation table reports their square roots).
    """

    K: int
    theta0: float
    a_sigma: float
    b_sigma: float
    a_zeta: float
    b_zeta: float
    a_theta: float
    b_theta: float
    a_kappa: float
    b_kappa: float
    m_zeta: float
    m_theta: float
    v2_zeta: float
    v2_theta: float
    m_nu: tuple
    v2_nu: float

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("latent dimension K must be a positive integer")
        if not 0.0 < self.theta0 < 1.0:
            raise ValueError("theta0 must lie in (0, 1)")
        for name in (
            "a_sigma", "b_sigma", "a_zeta", "b_zeta", "a_theta", "b_theta",
            "a_kappa", "b_kappa", "v2_zeta", "v2_theta", "v2_nu",
        ):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if len(self.m_nu) != self.K:
            raise ValueError("m_nu must have length K")
        object.__setattr__(self, "m_nu", tuple(float(v) for v in self.m_nu))

    def to_json(self) -> str:
        d = asdict(self)
        d["m_nu"] = list(d["m_nu"])
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Hyperparameters":
        d = json.loads(text)
        d["m_nu"] = tuple(d["m_nu"])
        return cls(**d)


@dataclass
class ParameterState:
    """One realization of every unknown in the model.

    Shapes: ``zeta``/``theta`` are (J,), ``u`` is (I, J, K) (J-axis length 1
    for GMLPM), ``eta`` is (I, K), ``nu`` is (K,).  For IFLPM the population
    fields hold their fixed constants and ``eta`` is identically zero.
    """

    zeta: np.ndarray
    theta: np.ndarray
    u: np.ndarray
    eta: np.ndarray
    sigma2: float
    mu_zeta: float
    tau2_zeta: float
    mu_theta: float
    tau2_theta: float
    nu: np.ndarray
    kappa2: float

    def __post_init__(self):
        self.zeta = np.asarray(self.zeta, dtype=float)
        self.theta = np.asarray(self.theta, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        self.eta = np.asarray(self.eta, dtype=float)
        self.nu = np.asarray(self.nu, dtype=float)
        if self.u.ndim != 3 or self.eta.ndim != 2:
            raise ValueError("u must be (I, J, K) and eta (I, K)")
        for name in ("sigma2", "tau2_zeta", "tau2_theta", "kappa2"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def n_actors(self) -> int:
        return self.u.shape[0]

    @property
    def n_layers(self) -> int:
        return self.zeta.shape[0]

    @property
    def latent_dim(self) -> int:
        return self.u.shape[2]

    def n_parameters(self) -> int:
        """Count of unknowns for the full hierarchical model: IK(J+1)+2J+K+6."""
        I, J, K = self.n_actors, self.n_layers, self.latent_dim
        return I * K * (J + 1) + 2 * J + K + 6

    def positions(self, j: int) -> np.ndarray:
        """Latent positions active in layer ``j`` (shared layer 0 for GMLPM)."""
        return self.u[:, min(j, self.u.shape[1] - 1), :]

    def copy(self) -> "ParameterState":
        return ParameterState(
            self.zeta.copy(), self.theta.copy(), self.u.copy(), self.eta.copy(),
            self.sigma2, self.mu_zeta, self.tau2_zeta, self.mu_theta,
            self.tau2_theta, self.nu.copy(), self.kappa2,
        )


# ---------------------------------------------------------------------------
# Likelihood
# ---------------------------------------------------------------------------


def interaction_probability(state: ParameterState, variant, i: int, i2: int, j: int):
    """Edge probability between actors ``i`` and ``i2`` in layer ``j``."""
    if i == i2:
        raise ValueError("the diagonal is a structural zero, not a probability")
    pos = state.positions(j if not ModelVariant(variant).shares_positions else 0)
    d = np.linalg.norm(pos[i] - pos[i2])
    return float(ndtr(state.zeta[j] - math.exp(state.theta[j]) * d))


def _bernoulli_loglik(x, y):
    """Sum of y*log(Phi(x)) + (1-y)*log(1-Phi(x)), numerically stable."""
    return float(np.sum(np.where(y == 1, log_ndtr(x), log_ndtr(-x))))


def log_likelihood(state: ParameterState, variant, net) -> float:
    """Bernoulli log-likelihood over observed unordered dyads, all layers."""
    variant = ModelVariant(variant)
    I, J = net.n_actors, net.n_layers
    if state.n_actors != I or state.n_layers != J:
        raise ValueError("state dimensions do not match the network")
    iu, iv = np.triu_indices(I, k=1)
    total = 0.0
    for j in range(J):
        pos = state.positions(0 if variant.shares_positions else j)
        d = np.linalg.norm(pos[iu] - pos[iv], axis=1)
        x = state.zeta[j] - math.exp(state.theta[j]) * d
        obs = net.mask[iu, iv, j]
        if not obs.any():
            continue
        y = net.adjacency[iu, iv, j][obs]
        total += _bernoulli_loglik(x[obs], y)
    return total


# ---------------------------------------------------------------------------
# Prior density
# ---------------------------------------------------------------------------


def _log_normal(x, mean, var):
    x = np.asarray(x, dtype=float)
    return float(np.sum(-0.5 * math.log(2.0 * math.pi) - 0.5 * np.log(var)
                        - 0.5 * (x - mean) ** 2 / var))


def log_invgamma_pdf(x: float, shape: float, rate: float) -> float:
    """Log density of the inverse-gamma distribution at ``x``."""
    if x <= 0.0:
        return -math.inf
    return (shape * math.log(rate) - gammaln(shape)
            - (shape + 1.0) * math.log(x) - rate / x)


def log_prior(state: ParameterState, variant, hyper: Hyperparameters) -> float:
    """Joint log prior density of a state under the given variant."""
    variant = ModelVariant(variant)
    if variant is ModelVariant.IFLPM:
        total = _log_normal(state.zeta, 0.0, IFLPM_TAU2)
        total += _log_normal(state.theta, 0.0, IFLPM_TAU2)
        total += _log_normal(state.u, 0.0, IFLPM_SIGMA2)
        return total

    total = _log_normal(state.zeta, state.mu_zeta, state.tau2_zeta)
    total += _log_normal(state.theta, state.mu_theta, state.tau2_theta)
    total += _log_normal(state.mu_zeta, hyper.m_zeta, hyper.v2_zeta)
    total += _log_normal(state.mu_theta, hyper.m_theta, hyper.v2_theta)
    total += log_invgamma_pdf(state.tau2_zeta, hyper.a_zeta, hyper.b_zeta)
    total += log_invgamma_pdf(state.tau2_theta, hyper.a_theta, hyper.b_theta)
    total += _log_normal(state.nu, np.asarray(hyper.m_nu), hyper.v2_nu)
    total += log_invgamma_pdf(state.kappa2, hyper.a_kappa, hyper.b_kappa)

    if variant is ModelVariant.GMLPM:
        # Single-level positions: u_i ~ N(nu, kappa2 I).
        total += _log_normal(state.u[:, 0, :], state.nu[None, :], state.kappa2)
        return total

    total += _log_normal(state.u, state.eta[:, None, :], state.sigma2)
    total += _log_normal(state.eta, state.nu[None, :], state.kappa2)
    total += log_invgamma_pdf(state.sigma2, hyper.a_sigma, hyper.b_sigma)
    return total


# ---------------------------------------------------------------------------
# Prior elicitation
# ---------------------------------------------------------------------------


def mean_latent_distance(K: int) -> tuple:
    """Mean and sd of ``||u_i - u_i2||`` when the difference is N_K(0, (2/9)I).

    Uses the scaled-chi moments: ``E = s * sqrt(2) * Gamma((K+1)/2) / Gamma(K/2)``
    with ``s = sqrt(2)/3``.
    """
    s = math.sqrt(2.0 / 9.0)
    mean = s * math.sqrt(2.0) * math.exp(gammaln((K + 1) / 2.0) - gammaln(K / 2.0))
    var = K * s * s - mean * mean
    return mean, math.sqrt(var)


def elicit(K: int, theta0: float = 0.1) -> Hyperparameters:
    """Default hyperparameters for latent dimension ``K`` and prior density
    ``theta0``.

    The marginal position variance 1/9 is split equally across its three
    sources (``b_sigma = b_kappa = 2/27``, ``v2_nu = 1/27``); the log-weight
    variance comes from a delta-method expansion
    ``var(theta_j) = 2 log(-quantile(theta0) / E[d])`` and the intercept
    variance is ``4 E[d]``, each split as ``b = var`` and ``v2 = var / 2``.
    """
    if K < 1:
        raise ValueError("latent dimension K must be a positive integer")
    if not 0.0 < theta0 < 0.5:
        raise ValueError("theta0 must lie in (0, 0.5)")
    e_d, _sd_d = mean_latent_distance(K)
    ratio = -std_normal_quantile(theta0) / e_d
    if ratio <= 1.0:
        raise ValueError(
            f"theta0={theta0} makes the delta-method log argument nonpositive"
        )
    var_theta = 2.0 * math.log(ratio)
    var_zeta = 4.0 * e_d
    return Hyperparameters(
        K=K,
        theta0=theta0,
        a_sigma=3.0, b_sigma=2.0 / 27.0,
        a_zeta=3.0, b_zeta=var_zeta,
        a_theta=3.0, b_theta=var_theta,
        a_kappa=3.0, b_kappa=2.0 / 27.0,
        m_zeta=0.0, m_theta=0.0,
        v2_zeta=var_zeta / 2.0,
        v2_theta=var_theta / 2.0,
        m_nu=(0.0,) * K,
        v2_nu=1.0 / 27.0,
    )


def elicitation_table_row(hyper: Hyperparameters) -> dict:
    """The elicited constants in reporting form (square-root v columns)."""
    e_d, sd_d = mean_latent_distance(hyper.K)
    return {
        "K": hyper.K,
        "mean_distance": e_d,
        "sd_distance": sd_d,
        "b_zeta": hyper.b_zeta,
        "b_theta": hyper.b_theta,
        "b_sigma": hyper.b_sigma,
        "b_kappa": hyper.b_kappa,
        "v_zeta": math.sqrt(hyper.v2_zeta),
        "v_theta": math.sqrt(hyper.v2_theta),
        "v_nu": math.sqrt(hyper.v2_nu),
    }


# ---------------------------------------------------------------------------
# Prior simulation
# ---------------------------------------------------------------------------


def sample_prior(hyper: Hyperparameters, I: int, J: int, variant="MNLPM",
                 seed=None, rng=None) -> ParameterState:
    """Top-down draw from the full prior cascade."""
    variant = ModelVariant(variant)
    if rng is None:
        rng = np.random.default_rng(seed)
    K = hyper.K

    def inv_gamma(shape, rate):
        return float(rate / rng.gamma(shape))

    if variant is ModelVariant.IFLPM:
        zeta = rng.normal(0.0, math.sqrt(IFLPM_TAU2), size=J)
        theta = rng.normal(0.0, math.sqrt(IFLPM_TAU2), size=J)
        u = rng.normal(0.0, math.sqrt(IFLPM_SIGMA2), size=(I, J, K))
        return ParameterState(
            zeta, theta, u, np.zeros((I, K)), IFLPM_SIGMA2, 0.0, IFLPM_TAU2,
            0.0, IFLPM_TAU2, np.zeros(K), 1.0,
        )

    tau2_zeta = inv_gamma(hyper.a_zeta, hyper.b_zeta)
    tau2_theta = inv_gamma(hyper.a_theta, hyper.b_theta)
    kappa2 = inv_gamma(hyper.a_kappa, hyper.b_kappa)
    sigma2 = inv_gamma(hyper.a_sigma, hyper.b_sigma)
    mu_zeta = rng.normal(hyper.m_zeta, math.sqrt(hyper.v2_zeta))
    mu_theta = rng.normal(hyper.m_theta, math.sqrt(hyper.v2_theta))
    nu = rng.normal(np.asarray(hyper.m_nu), math.sqrt(hyper.v2_nu))
    zeta = rng.normal(mu_zeta, math.sqrt(tau2_zeta), size=J)
    theta = rng.normal(mu_theta, math.sqrt(tau2_theta), size=J)

    if variant is ModelVariant.GMLPM:
        u = nu[None, None, :] + rng.normal(0.0, math.sqrt(kappa2), size=(I, 1, K))
        eta = np.zeros((I, K))
    else:
        eta = nu[None, :] + rng.normal(0.0, math.sqrt(kappa2), size=(I, K))
        u = eta[:, None, :] + rng.normal(0.0, math.sqrt(sigma2), size=(I, J, K))
    return ParameterState(
        zeta, theta, u, eta, sigma2, mu_zeta, tau2_zeta, mu_theta, tau2_theta,
        nu, kappa2,
    )


def prior_predictive_probabilities(hyper: Hyperparameters, n_draws: int,
                                   seed=None) -> np.ndarray:
    """Marginal prior draws of the edge probability for a single dyad.

    Each draw runs the full cascade for two actors in one layer.
    """
    if n_draws < 1:
        raise ValueError("n_draws must be at least 1")
    rng = np.random.default_rng(seed)
    K = hyper.K
    tau2_zeta = hyper.b_zeta / rng.gamma(hyper.a_zeta, size=n_draws)
    tau2_theta = hyper.b_theta / rng.gamma(hyper.a_theta, size=n_draws)
    kappa2 = hyper.b_kappa / rng.gamma(hyper.a_kappa, size=n_draws)
    sigma2 = hyper.b_sigma / rng.gamma(hyper.a_sigma, size=n_draws)
    mu_zeta = rng.normal(hyper.m_zeta, math.sqrt(hyper.v2_zeta), size=n_draws)
    mu_theta = rng.normal(hyper.m_theta, math.sqrt(hyper.v2_theta), size=n_draws)
    zeta = rng.normal(mu_zeta, np.sqrt(tau2_zeta))
    theta = rng.normal(mu_theta, np.sqrt(tau2_theta))
    # nu cancels from position differences; eta-level and u-level noise do not.
    eta_diff = rng.normal(0.0, 1.0, size=(n_draws, K)) * np.sqrt(2.0 * kappa2)[:, None]
    u_diff = eta_diff + rng.normal(0.0, 1.0, size=(n_draws, K)) * np.sqrt(2.0 * sigma2)[:, None]
    d = np.linalg.norm(u_diff, axis=1)
    return ndtr(zeta - np.exp(theta) * d)
