"""Posterior simulation for the multilayer latent position model.

One sweep follows the fixed block order: latent positions (adaptive
random-walk Metropolis, one actor/layer vector at a time in lexicographic
order), then the conjugate Gibbs blocks for actor means and variance
components, then Metropolis updates of the layer log-weights and intercepts
interleaved with their conjugate population-level updates.  Variants lacking
a block simply skip it.

Chains are strictly sequential and bit-reproducible for a fixed seed; the
retained output is written/read as a fixed-width little-endian binary record
stream (see :func:`save_samples`).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.special import log_ndtr

from .model import (
    IFLPM_SIGMA2,
    IFLPM_TAU2,
    Hyperparameters,
    ModelVariant,
    ParameterState,
    sample_prior,
)

_VARIANT_CODE = {ModelVariant.MNLPM: 0, ModelVariant.IFLPM: 1, ModelVariant.GMLPM: 2}
_CODE_VARIANT = {v: k for k, v in _VARIANT_CODE.items()}
_MAGIC = b"MNLPMBIN"


@dataclass(frozen=True)
class AdaptConfig:
    """Robbins-Monro step-size adaptation for the Metropolis blocks."""

    target_accept: float = 0.35
    adapt_rate_decay: float = 0.8
    initial_log_step: float = math.log(0.1)
    freeze_after_burnin: bool = True

    def __post_init__(self):
        if not 0.0 < self.target_accept < 1.0:
            raise ValueError("target_accept must lie in (0, 1)")
        if not 0.5 < self.adapt_rate_decay <= 1.0:
            raise ValueError("adapt_rate_decay must lie in (0.5, 1]")


@dataclass(frozen=True)
class FitConfig:
    """Chain-management settings for one posterior run."""

    variant: ModelVariant = ModelVariant.MNLPM
    K: int = 2
    n_burn: int = 100_000
    n_thin: int = 10
    n_keep: int = 10_000
    seed: int = 0
    adapt: AdaptConfig = field(default_factory=AdaptConfig)

    def __post_init__(self):
        object.__setattr__(self, "variant", ModelVariant(self.variant))
        if self.n_burn < 0 or self.n_thin < 1 or self.n_keep < 1:
            raise ValueError("need n_burn >= 0, n_thin >= 1, n_keep >= 1")

    @property
    def n_sweeps(self) -> int:
        return self.n_burn + self.n_thin * self.n_keep

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variant"] = self.variant.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FitConfig":
        d = dict(d)
        if isinstance(d.get("adapt"), dict):
            d["adapt"] = AdaptConfig(**d["adapt"])
        return cls(**d)


class PosteriorSamples:
    """Retained MCMC output stored as stacked arrays.

    ``states(b)`` materializes sample ``b`` as a :class:`ParameterState`.
    ``accept_rates`` maps Metropolis block families to realized post-burn-in
    acceptance rates (per-layer for intercepts/log-weights, per actor-layer
    for positions).
    """

    def __init__(self, config, hyper, zeta, theta, u, eta, scalars, nu,
                 loglik_trace, accept_rates):
        self.config = config
        self.hyper = hyper
        self.zeta = zeta            # (B, J)
        self.theta = theta          # (B, J)
        self.u = u                  # (B, I, J_u, K)
        self.eta = eta              # (B, I, K)
        self.scalars = scalars      # (B, 6): sigma2, mu_z, tau2_z, mu_t, tau2_t, kappa2
        self.nu = nu                # (B, K)
        self.loglik_trace = loglik_trace
        self.accept_rates = accept_rates

    @property
    def n_samples(self) -> int:
        return self.zeta.shape[0]

    @property
    def n_actors(self) -> int:
        return self.u.shape[1]

    @property
    def n_layers(self) -> int:
        return self.zeta.shape[1]

    @property
    def latent_dim(self) -> int:
        return self.u.shape[3]

    def state(self, b: int) -> ParameterState:
        s = self.scalars[b]
        return ParameterState(
            self.zeta[b], self.theta[b], self.u[b], self.eta[b],
            s[0], s[1], s[2], s[3], s[4], self.nu[b], s[5],
        )

    def states(self):
        for b in range(self.n_samples):
            yield self.state(b)


# ---------------------------------------------------------------------------
# Conjugate full-conditional draws (Appendix-style Gibbs blocks)
# ---------------------------------------------------------------------------


def gibbs_eta(state: ParameterState, net, hyper: Hyperparameters, rng) -> np.ndarray:
    """Draw every actor-mean row from its Gaussian full conditional in place."""
    J = state.n_layers
    prec = 1.0 / state.kappa2 + J / state.sigma2
    mean = (state.nu[None, :] / state.kappa2
            + state.u.sum(axis=1) / state.sigma2) / prec
    state.eta = mean + rng.standard_normal(state.eta.shape) / math.sqrt(prec)
    return state.eta


def gibbs_sigma2(state: ParameterState, net, hyper: Hyperparameters, rng) -> float:
    """Draw the position variance from its inverse-gamma full conditional."""
    I, J, K = state.n_actors, state.n_layers, state.latent_dim
    resid = state.u - state.eta[:, None, :]
    shape = hyper.a_sigma + I * J * K / 2.0
    rate = hyper.b_sigma + 0.5 * float(np.sum(resid * resid))
    state.sigma2 = float(rate / rng.gamma(shape))
    return state.sigma2


def gibbs_nu(state: ParameterState, hyper: Hyperparameters, rng,
             from_positions: bool = False) -> np.ndarray:
    """Draw the population mean vector.

    For the shared-position variant the children of ``nu`` are the positions
    themselves (``from_positions=True``) rather than the actor means.
    """
    I = state.n_actors
    children = state.u[:, 0, :] if from_positions else state.eta
    prec = 1.0 / hyper.v2_nu + I / state.kappa2
    mean = (np.asarray(hyper.m_nu) / hyper.v2_nu
            + children.sum(axis=0) / state.kappa2) / prec
    state.nu = mean + rng.standard_normal(state.nu.shape) / math.sqrt(prec)
    return state.nu


def gibbs_kappa2(state: ParameterState, hyper: Hyperparameters, rng,
                 from_positions: bool = False) -> float:
    """Draw the actor-mean variance from its inverse-gamma full conditional."""
    I, K = state.n_actors, state.latent_dim
    children = state.u[:, 0, :] if from_positions else state.eta
    resid = children - state.nu[None, :]
    shape = hyper.a_kappa + I * K / 2.0
    rate = hyper.b_kappa + 0.5 * float(np.sum(resid * resid))
    state.kappa2 = float(rate / rng.gamma(shape))
    return state.kappa2


def gibbs_mu_tau(block: str, state: ParameterState, hyper: Hyperparameters,
                 rng) -> tuple:
    """Draw the population mean and variance of the intercepts or log-weights.

    ``block`` is ``"zeta"`` or ``"theta"``.  Returns the new ``(mu, tau2)``.
    """
    if block == "zeta":
        values, m, v2, a, b = (state.zeta, hyper.m_zeta, hyper.v2_zeta,
                               hyper.a_zeta, hyper.b_zeta)
    elif block == "theta":
        values, m, v2, a, b = (state.theta, hyper.m_theta, hyper.v2_theta,
                               hyper.a_theta, hyper.b_theta)
    else:
        raise ValueError(f"unknown block {block!r}")
    J = values.shape[0]
    tau2 = state.tau2_zeta if block == "zeta" else state.tau2_theta
    prec = 1.0 / v2 + J / tau2
    mean = (m / v2 + values.sum() / tau2) / prec
    mu = float(mean + rng.standard_normal() / math.sqrt(prec))
    shape = a + J / 2.0
    rate = b + 0.5 * float(np.sum((values - mu) ** 2))
    tau2 = float(rate / rng.gamma(shape))
    if block == "zeta":
        state.mu_zeta, state.tau2_zeta = mu, tau2
    else:
        state.mu_theta, state.tau2_theta = mu, tau2
    return mu, tau2


# ---------------------------------------------------------------------------
# Metropolis block conditionals
# ---------------------------------------------------------------------------


def _pair_loglik(x, y):
    return float(np.sum(np.where(y == 1, log_ndtr(x), log_ndtr(-x))))


def block_log_conditional(block, value, state: ParameterState, variant, net,
                          hyper: Hyperparameters) -> float:
    """Log full-conditional density (up to a constant) of one Metropolis block.

    ``block`` is ``("u", i, j)``, ``("zeta", j)``, or ``("theta", j)``; for the
    shared-position variant the ``("u", i, 0)`` block's likelihood spans every
    layer.  Recomputes incident likelihood terms directly; used both by the
    reference :func:`mh_update` and by oracle tests against the full
    ``log_likelihood + log_prior``.
    """
    variant = ModelVariant(variant)
    kind = block[0]
    I = state.n_actors
    if kind == "u":
        _, i, j = block
        value = np.asarray(value, dtype=float)
        others = np.arange(I) != i
        total = 0.0
        layers = range(state.n_layers) if variant.shares_positions else (j,)
        for lj in layers:
            pos = state.positions(0 if variant.shares_positions else lj).copy()
            pos[i] = value
            obs = net.mask[i, :, lj] & others
            if obs.any():
                d = np.linalg.norm(pos[obs] - value[None, :], axis=1)
                x = state.zeta[lj] - math.exp(state.theta[lj]) * d
                total += _pair_loglik(x, net.adjacency[i, obs, lj])
        if variant is ModelVariant.IFLPM:
            total += -0.5 * float(np.sum(value * value)) / IFLPM_SIGMA2
        elif variant is ModelVariant.GMLPM:
            total += -0.5 * float(np.sum((value - state.nu) ** 2)) / state.kappa2
        else:
            total += -0.5 * float(np.sum((value - state.eta[i]) ** 2)) / state.sigma2
        return total

    j = block[1]
    pos = state.positions(0 if variant.shares_positions else j)
    iu, iv = np.triu_indices(I, k=1)
    obs = net.mask[iu, iv, j]
    d = np.linalg.norm(pos[iu[obs]] - pos[iv[obs]], axis=1)
    y = net.adjacency[iu, iv, j][obs]
    if kind == "zeta":
        x = float(value) - math.exp(state.theta[j]) * d
        mu, tau2 = ((0.0, IFLPM_TAU2) if variant is ModelVariant.IFLPM
                    else (state.mu_zeta, state.tau2_zeta))
    elif kind == "theta":
        x = state.zeta[j] - math.exp(float(value)) * d
        mu, tau2 = ((0.0, IFLPM_TAU2) if variant is ModelVariant.IFLPM
                    else (state.mu_theta, state.tau2_theta))
    else:
        raise ValueError(f"unknown block kind {kind!r}")
    return _pair_loglik(x, y) - 0.5 * (float(value) - mu) ** 2 / tau2


@dataclass
class AdaptState:
    """Per-block log step size plus the Robbins-Monro iteration counter."""

    log_step: float
    n: int = 0

    def step(self) -> float:
        return math.exp(self.log_step)

    def update(self, accept_prob: float, cfg: AdaptConfig) -> None:
        self.n += 1
        gain = self.n ** (-cfg.adapt_rate_decay)
        self.log_step += gain * (accept_prob - cfg.target_accept)


def mh_update(block, state: ParameterState, net, hyper: Hyperparameters,
              adapt_state: AdaptState, rng, adapt_cfg: AdaptConfig | None = None,
              variant="MNLPM", adapting: bool = True) -> bool:
    """One Gaussian random-walk Metropolis update of ``block`` in place.

    Returns True on acceptance.  The proposal scale lives in ``adapt_state``
    and is tuned toward the target acceptance rate while ``adapting``.
    """
    variant = ModelVariant(variant)
    kind = block[0]
    if kind == "u":
        _, i, j = block
        current = state.u[i, j].copy()
        proposal = current + adapt_state.step() * rng.standard_normal(current.shape)
    else:
        j = block[1]
        vec = state.zeta if kind == "zeta" else state.theta
        current = float(vec[j])
        proposal = current + adapt_state.step() * rng.standard_normal()
    lp_cur = block_log_conditional(block, current, state, variant, net, hyper)
    lp_new = block_log_conditional(block, proposal, state, variant, net, hyper)
    log_alpha = lp_new - lp_cur
    accept_prob = min(1.0, math.exp(min(0.0, log_alpha)))
    accepted = math.log(rng.random()) < log_alpha
    if accepted:
        if kind == "u":
            state.u[i, j] = proposal
        elif kind == "zeta":
            state.zeta[j] = proposal
        else:
            state.theta[j] = proposal
    if adapting:
        adapt_state.update(accept_prob, adapt_cfg or AdaptConfig())
    return bool(accepted)


# ---------------------------------------------------------------------------
# Chain driver
# ---------------------------------------------------------------------------


class _Chain:
    """Mutable sweep state with cached per-layer distances."""

    def __init__(self, net, hyper, config, frozen=None):
        self.net = net
        self.hyper = hyper
        self.config = config
        self.variant = config.variant
        self.frozen = dict(frozen or {})
        self.rng = np.random.default_rng(config.seed)
        self.I, self.J = net.n_actors, net.n_layers
        self.K = hyper.K
        self.J_u = 1 if self.variant.shares_positions else self.J

        self.state = sample_prior(hyper, self.I, self.J, self.variant, rng=self.rng)
        if self.variant.shares_positions:
            self.state.u = self.state.u[:, :1, :]
        self._apply_frozen()

        iu, iv = np.triu_indices(self.I, k=1)
        self.iu, self.iv = iu, iv
        self.obs = np.stack([net.mask[iu, iv, j] for j in range(self.J)])
        self.y = np.stack([net.adjacency[iu, iv, j] for j in range(self.J)])
        # Distance matrices per stored position layer.
        self.dist = np.zeros((self.J_u, self.I, self.I))
        for j in range(self.J_u):
            p = self.state.u[:, j, :]
            self.dist[j] = np.linalg.norm(p[:, None, :] - p[None, :, :], axis=2)
        self.ll_layer = np.array([self._layer_loglik(j) for j in range(self.J)])

        cfg = config.adapt
        self.adapt_u = np.full((self.I, self.J_u), cfg.initial_log_step)
        self.adapt_zeta = np.full(self.J, cfg.initial_log_step)
        self.adapt_theta = np.full(self.J, cfg.initial_log_step)
        self.adapt_n = np.zeros(3, dtype=np.int64)  # u, zeta, theta counters
        self.acc_u = np.zeros((self.I, self.J_u))
        self.prop_u = np.zeros((self.I, self.J_u))
        self.acc_z = np.zeros(self.J)
        self.acc_t = np.zeros(self.J)
        self.prop_scalar = 0
        self.sweep_index = 0

    # -- likelihood helpers -------------------------------------------------

    def _apply_frozen(self):
        for name, value in self.frozen.items():
            setattr(self.state, name, value if np.isscalar(value)
                    else np.array(value, dtype=float))

    def _dist_layer(self, j: int) -> np.ndarray:
        return self.dist[0 if self.variant.shares_positions else j]

    def _layer_loglik(self, j: int) -> float:
        obs = self.obs[j]
        if not obs.any():
            return 0.0
        d = self._dist_layer(j)[self.iu[obs], self.iv[obs]]
        x = self.state.zeta[j] - math.exp(self.state.theta[j]) * d
        return _pair_loglik(x, self.y[j][obs])

    def total_loglik(self) -> float:
        return float(self.ll_layer.sum())

    # -- Metropolis blocks --------------------------------------------------

    def _adapt_gain(self, family: int) -> float:
        cfg = self.config.adapt
        self.adapt_n[family] += 1
        return float(self.adapt_n[family]) ** (-cfg.adapt_rate_decay)

    def _update_u_block(self, i: int, ju: int, adapting: bool):
        st = self.state
        s = st.sigma2
        current = st.u[i, ju]
        step = math.exp(self.adapt_u[i, ju])
        proposal = current + step * self.rng.standard_normal(self.K)
        others = np.arange(self.I) != i

        layers = range(self.J) if self.variant.shares_positions else (ju,)
        delta_ll = 0.0
        per_layer_delta = {}
        pos = st.u[:, ju, :]
        d_new_row = np.linalg.norm(pos - proposal[None, :], axis=1)
        d_old_row = self.dist[ju, i]
        for lj in layers:
            obs = self.net.mask[i, :, lj] & others
            if not obs.any():
                per_layer_delta[lj] = 0.0
                continue
            w = math.exp(st.theta[lj])
            y_row = self.net.adjacency[i, obs, lj]
            x_old = st.zeta[lj] - w * d_old_row[obs]
            x_new = st.zeta[lj] - w * d_new_row[obs]
            dl = _pair_loglik(x_new, y_row) - _pair_loglik(x_old, y_row)
            per_layer_delta[lj] = dl
            delta_ll += dl

        if self.variant is ModelVariant.IFLPM:
            prior_mean, prior_var = 0.0, IFLPM_SIGMA2
        elif self.variant.shares_positions:
            prior_mean, prior_var = st.nu, st.kappa2
        else:
            prior_mean, prior_var = st.eta[i], s
        d_prior = (-0.5 * float(np.sum((proposal - prior_mean) ** 2)) / prior_var
                   + 0.5 * float(np.sum((current - prior_mean) ** 2)) / prior_var)
        log_alpha = delta_ll + d_prior
        accept_prob = math.exp(min(0.0, log_alpha))
        self.prop_u[i, ju] += 1
        if math.log(self.rng.random()) < log_alpha:
            st.u[i, ju] = proposal
            d_new_row = d_new_row.copy()
            d_new_row[i] = 0.0
            self.dist[ju, i, :] = d_new_row
            self.dist[ju, :, i] = d_new_row
            for lj, dl in per_layer_delta.items():
                self.ll_layer[lj] += dl
            self.acc_u[i, ju] += 1
        if adapting:
            self.adapt_u[i, ju] += self._adapt_gain(0) * (
                accept_prob - self.config.adapt.target_accept
            )

    def _update_layer_scalar(self, kind: str, j: int, adapting: bool):
        st = self.state
        obs = self.obs[j]
        d = self._dist_layer(j)[self.iu[obs], self.iv[obs]]
        y = self.y[j][obs]
        if kind == "zeta":
            current = float(st.zeta[j])
            step = math.exp(self.adapt_zeta[j])
            if self.variant is ModelVariant.IFLPM:
                mu, tau2 = 0.0, IFLPM_TAU2
            else:
                mu, tau2 = st.mu_zeta, st.tau2_zeta
        else:
            current = float(st.theta[j])
            step = math.exp(self.adapt_theta[j])
            if self.variant is ModelVariant.IFLPM:
                mu, tau2 = 0.0, IFLPM_TAU2
            else:
                mu, tau2 = st.mu_theta, st.tau2_theta
        proposal = current + step * self.rng.standard_normal()
        if kind == "zeta":
            x_new = proposal - math.exp(st.theta[j]) * d
        else:
            x_new = st.zeta[j] - math.exp(proposal) * d
        ll_new = _pair_loglik(x_new, y) if obs.any() else 0.0
        delta = (ll_new - self.ll_layer[j]
                 - 0.5 * (proposal - mu) ** 2 / tau2
                 + 0.5 * (current - mu) ** 2 / tau2)
        accept_prob = math.exp(min(0.0, delta))
        if math.log(self.rng.random()) < delta:
            if kind == "zeta":
                st.zeta[j] = proposal
                self.acc_z[j] += 1
            else:
                st.theta[j] = proposal
                self.acc_t[j] += 1
            self.ll_layer[j] = ll_new
        if adapting:
            gain = self._adapt_gain(1 if kind == "zeta" else 2)
            target = self.config.adapt.target_accept
            if kind == "zeta":
                self.adapt_zeta[j] += gain * (accept_prob - target)
            else:
                self.adapt_theta[j] += gain * (accept_prob - target)
        self.prop_scalar += 1

    # -- sweep --------------------------------------------------------------

    def sweep(self, adapting: bool):
        st, rng = self.state, self.rng
        variant = self.variant
        for i in range(self.I):
            for ju in range(self.J_u):
                self._update_u_block(i, ju, adapting)
        if variant is ModelVariant.MNLPM:
            if "eta" not in self.frozen:
                gibbs_eta(st, self.net, self.hyper, rng)
            if "sigma2" not in self.frozen:
                gibbs_sigma2(st, self.net, self.hyper, rng)
        if variant is not ModelVariant.IFLPM:
            shared = variant.shares_positions
            if "nu" not in self.frozen:
                gibbs_nu(st, self.hyper, rng, from_positions=shared)
            if "kappa2" not in self.frozen:
                gibbs_kappa2(st, self.hyper, rng, from_positions=shared)
        for j in range(self.J):
            self._update_layer_scalar("theta", j, adapting)
        if variant is not ModelVariant.IFLPM and "mu_theta" not in self.frozen:
            gibbs_mu_tau("theta", st, self.hyper, rng)
        for j in range(self.J):
            self._update_layer_scalar("zeta", j, adapting)
        if variant is not ModelVariant.IFLPM and "mu_zeta" not in self.frozen:
            gibbs_mu_tau("zeta", st, self.hyper, rng)
        self._apply_frozen()
        self.sweep_index += 1
        # Periodic full recomputation caps accumulated drift.
        if self.sweep_index % 1000 == 0:
            self.ll_layer = np.array([self._layer_loglik(j) for j in range(self.J)])

    def accept_rates(self) -> dict:
        with np.errstate(invalid="ignore", divide="ignore"):
            return {
                "u": self.acc_u / np.maximum(self.prop_u, 1),
                "zeta": self.acc_z / max(self.sweep_index, 1),
                "theta": self.acc_t / max(self.sweep_index, 1),
            }

    def reset_acceptance_counters(self):
        self.acc_u[:] = 0
        self.prop_u[:] = 0
        self.acc_z[:] = 0
        self.acc_t[:] = 0
        self.sweep_index = 0


def run_mcmc(net, hyper: Hyperparameters, config: FitConfig, frozen=None,
             checkpoint_every=None, checkpoint_dir=None) -> PosteriorSamples:
    """Run one chain and return the retained, thinned posterior samples.

    ``frozen`` optionally maps parameter names to fixed values excluded from
    updating (used for degenerate-hierarchy comparisons).  When
    ``checkpoint_every`` is set, a resumable snapshot is written to
    ``checkpoint_dir`` every that many sweeps.
    """
    chain = _Chain(net, hyper, config, frozen)
    return _drive(chain, config, 0, None, checkpoint_every, checkpoint_dir)


def _drive(chain, config, start_sweep, retained, checkpoint_every, checkpoint_dir):
    I, J, K, J_u = chain.I, chain.J, chain.K, chain.J_u
    B = config.n_keep
    if retained is None:
        retained = {
            "zeta": np.empty((B, J)), "theta": np.empty((B, J)),
            "u": np.empty((B, I, J_u, K)), "eta": np.empty((B, I, K)),
            "scalars": np.empty((B, 6)), "nu": np.empty((B, K)),
            "loglik": np.empty(B),
        }
    total = config.n_sweeps
    freeze = config.adapt.freeze_after_burnin
    for sweep in range(start_sweep, total):
        in_burn = sweep < config.n_burn
        if sweep == config.n_burn:
            chain.reset_acceptance_counters()
        chain.sweep(adapting=in_burn or not freeze)
        if not in_burn:
            offset = sweep - config.n_burn
            if (offset + 1) % config.n_thin == 0:
                b = offset // config.n_thin
                st = chain.state
                retained["zeta"][b] = st.zeta
                retained["theta"][b] = st.theta
                retained["u"][b] = st.u
                retained["eta"][b] = st.eta
                retained["scalars"][b] = (st.sigma2, st.mu_zeta, st.tau2_zeta,
                                          st.mu_theta, st.tau2_theta, st.kappa2)
                retained["nu"][b] = st.nu
                ll = chain.total_loglik()
                if not math.isfinite(ll):
                    raise FloatingPointError(
                        f"non-finite log-likelihood at sweep {sweep}"
                    )
                retained["loglik"][b] = ll
        if checkpoint_every and checkpoint_dir and (sweep + 1) % checkpoint_every == 0:
            _write_checkpoint(checkpoint_dir, chain, config, sweep + 1, retained)
    return PosteriorSamples(
        config, chain.hyper, retained["zeta"], retained["theta"], retained["u"],
        retained["eta"], retained["scalars"], retained["nu"], retained["loglik"],
        chain.accept_rates(),
    )


# ---------------------------------------------------------------------------
# Checkpointing
# ---------------------------------------------------------------------------


def _write_checkpoint(directory, chain, config, next_sweep, retained):
    os.makedirs(directory, exist_ok=True)
    st = chain.state
    path = os.path.join(directory, "checkpoint.npz")
    np.savez(
        path,
        next_sweep=next_sweep,
        zeta=st.zeta, theta=st.theta, u=st.u, eta=st.eta, nu=st.nu,
        scalars=np.array([st.sigma2, st.mu_zeta, st.tau2_zeta, st.mu_theta,
                          st.tau2_theta, st.kappa2]),
        adapt_u=chain.adapt_u, adapt_zeta=chain.adapt_zeta,
        adapt_theta=chain.adapt_theta, adapt_n=chain.adapt_n,
        sweep_index=chain.sweep_index,
        rng_state=json.dumps(chain.rng.bit_generator.state),
        **{f"ret_{k}": v for k, v in retained.items()},
    )


def resume_mcmc(net, hyper, config: FitConfig, checkpoint_dir) -> PosteriorSamples:
    """Continue a checkpointed run to completion."""
    data = np.load(os.path.join(checkpoint_dir, "checkpoint.npz"))
    chain = _Chain(net, hyper, config)
    st = chain.state
    st.zeta, st.theta = data["zeta"].copy(), data["theta"].copy()
    st.u, st.eta, st.nu = data["u"].copy(), data["eta"].copy(), data["nu"].copy()
    (st.sigma2, st.mu_zeta, st.tau2_zeta, st.mu_theta, st.tau2_theta,
     st.kappa2) = data["scalars"]
    chain.adapt_u = data["adapt_u"].copy()
    chain.adapt_zeta = data["adapt_zeta"].copy()
    chain.adapt_theta = data["adapt_theta"].copy()
    chain.adapt_n = data["adapt_n"].copy()
    chain.sweep_index = int(data["sweep_index"])
    chain.rng.bit_generator.state = json.loads(str(data["rng_state"]))
    for j in range(chain.J_u):
        p = st.u[:, j, :]
        chain.dist[j] = np.linalg.norm(p[:, None, :] - p[None, :, :], axis=2)
    chain.ll_layer = np.array([chain._layer_loglik(j) for j in range(chain.J)])
    retained = {k[4:]: data[k].copy() for k in data.files if k.startswith("ret_")}
    return _drive(chain, config, int(data["next_sweep"]), retained, None, None)


# ---------------------------------------------------------------------------
# Effective sample size
# ---------------------------------------------------------------------------


def effective_sample_size(trace) -> float:
    """ESS via the initial-positive-sequence rule on paired autocorrelations."""
    x = np.asarray(trace, dtype=float)
    n = x.size
    if n < 10:
        raise ValueError("trace must have at least 10 elements")
    if np.all(x == x[0]):
        return float(n)  # constant trace: zero-autocorrelation convention
    x = x - x.mean()
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:n] / n
    rho = acov / acov[0]
    # Geyer initial positive sequence: sum consecutive lag pairs while positive.
    total = 0.0
    k = 1
    while k + 1 < n:
        pair = rho[k] + rho[k + 1]
        if pair <= 0.0:
            break
        total += pair
        k += 2
    ess = n / (1.0 + 2.0 * total)
    return float(min(max(ess, 1e-12), n))


# ---------------------------------------------------------------------------
# Persistence: samples.bin + CSV traces
# ---------------------------------------------------------------------------


def record_length(I, J, J_u, K) -> int:
    """Number of float64 values per retained sample record."""
    return 2 * J + I * J_u * K + I * K + 5 + K + 1


def save_samples(samples: PosteriorSamples, directory) -> None:
    """Persist a run: samples.bin, loglik.csv, accept.csv, config.json.

    ``samples.bin`` layout (little endian): 8-byte magic ``MNLPMBIN``; uint32
    version, I, J, K, B, J_u; uint8 variant code (0 MNLPM, 1 IFLPM, 2 GMLPM);
    then B float64 records of zeta (J), theta (J), u (I*J_u*K, C order),
    eta (I*K), sigma2, mu_zeta, tau2_zeta, mu_theta, tau2_theta, nu (K),
    kappa2.
    """
    os.makedirs(directory, exist_ok=True)
    B, I, J, K = (samples.n_samples, samples.n_actors, samples.n_layers,
                  samples.latent_dim)
    J_u = samples.u.shape[2]
    with open(os.path.join(directory, "samples.bin"), "wb") as fh:
        fh.write(_MAGIC)
        fh.write(np.array([1, I, J, K, B, J_u], dtype="<u4").tobytes())
        fh.write(np.array([_VARIANT_CODE[samples.config.variant]],
                          dtype="<u1").tobytes())
        rec = np.empty((B, record_length(I, J, J_u, K)), dtype="<f8")
        rec[:, :J] = samples.zeta
        rec[:, J:2 * J] = samples.theta
        o = 2 * J
        rec[:, o:o + I * J_u * K] = samples.u.reshape(B, -1)
        o += I * J_u * K
        rec[:, o:o + I * K] = samples.eta.reshape(B, -1)
        o += I * K
        rec[:, o:o + 5] = samples.scalars[:, :5]
        o += 5
        rec[:, o:o + K] = samples.nu
        o += K
        rec[:, o] = samples.scalars[:, 5]
        fh.write(rec.tobytes())
    np.savetxt(os.path.join(directory, "loglik.csv"), samples.loglik_trace,
               header="loglik", comments="", fmt="%.10g")
    with open(os.path.join(directory, "accept.csv"), "w") as fh:
        fh.write("block,rate\n")
        rates = samples.accept_rates
        for j, r in enumerate(rates["zeta"]):
            fh.write(f"zeta_{j + 1},{r:.6f}\n")
        for j, r in enumerate(rates["theta"]):
            fh.write(f"theta_{j + 1},{r:.6f}\n")
        u_rates = np.asarray(rates["u"])
        for i in range(u_rates.shape[0]):
            for j in range(u_rates.shape[1]):
                fh.write(f"u_{i + 1}_{j + 1},{u_rates[i, j]:.6f}\n")
    with open(os.path.join(directory, "config.json"), "w") as fh:
        json.dump({"fit": samples.config.to_dict(),
                   "hyper": json.loads(samples.hyper.to_json())}, fh, indent=2)


def load_samples(directory) -> PosteriorSamples:
    """Read back a run persisted by :func:`save_samples`."""
    with open(os.path.join(directory, "config.json")) as fh:
        meta = json.load(fh)
    config = FitConfig.from_dict(meta["fit"])
    hyper = Hyperparameters.from_json(json.dumps(meta["hyper"]))
    with open(os.path.join(directory, "samples.bin"), "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError(f"bad samples.bin magic {magic!r}")
        version, I, J, K, B, J_u = np.frombuffer(fh.read(24), dtype="<u4")
        if version != 1:
            raise ValueError(f"unsupported samples.bin version {version}")
        code = np.frombuffer(fh.read(1), dtype="<u1")[0]
        rec = np.frombuffer(fh.read(), dtype="<f8").reshape(
            B, record_length(I, J, J_u, K))
    if _CODE_VARIANT[int(code)] != config.variant:
        raise ValueError("variant code in samples.bin disagrees with config.json")
    zeta = rec[:, :J].copy()
    theta = rec[:, J:2 * J].copy()
    o = 2 * J
    u = rec[:, o:o + I * J_u * K].reshape(B, I, J_u, K).copy()
    o += I * J_u * K
    eta = rec[:, o:o + I * K].reshape(B, I, K).copy()
    o += I * K
    scalars = np.empty((B, 6))
    scalars[:, :5] = rec[:, o:o + 5]
    o += 5
    nu = rec[:, o:o + K].copy()
    o += K
    scalars[:, 5] = rec[:, o]
    loglik = np.loadtxt(os.path.join(directory, "loglik.csv"), skiprows=1)
    accept = {"zeta": np.zeros(J), "theta": np.zeros(J), "u": np.zeros((I, J_u))}
    with open(os.path.join(directory, "accept.csv")) as fh:
        next(fh)
        for line in fh:
            name, val = line.strip().split(",")
            parts = name.split("_")
            if parts[0] in ("zeta", "theta"):
                accept[parts[0]][int(parts[1]) - 1] = float(val)
            else:
                accept["u"][int(parts[1]) - 1, int(parts[2]) - 1] = float(val)
    return PosteriorSamples(config, hyper, zeta, theta, u, eta, scalars, nu,
                            np.atleast_1d(loglik), accept)
