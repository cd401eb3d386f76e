"""Identifiability post-processing and latent-space summaries.

The likelihood only sees distances, so each retained sample's latent
configuration is defined up to an orthogonal transformation.  Samples are
aligned by orthogonal Procrustes onto the actor-mean configuration of the
first retained sample; every summary that depends on coordinates (layer
correlation, perception assessment, position plots) is computed from the
aligned draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelVariant, std_normal_cdf


@dataclass(frozen=True)
class IntervalSummary:
    """Posterior mean with a central 95% credible interval."""

    point: float
    lo: float
    hi: float

    @property
    def significant(self) -> bool:
        """True when the interval excludes zero."""
        return self.lo > 0.0 or self.hi < 0.0


def summarize(draws) -> IntervalSummary:
    draws = np.asarray(draws, dtype=float)
    lo, hi = np.quantile(draws, [0.025, 0.975])
    return IntervalSummary(float(draws.mean()), float(lo), float(hi))


@dataclass
class AlignedSamples:
    """Procrustes-aligned posterior draws of the latent configurations.

    ``rotations[b]`` is the orthogonal matrix applied to sample ``b``;
    ``u_tilde`` has shape (B, I, J_u, K) and ``eta_tilde`` (B, I, K).
    """

    rotations: np.ndarray
    u_tilde: np.ndarray
    eta_tilde: np.ndarray
    reference_index: int = 0


def procrustes_rotation(reference: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Orthogonal matrix Q minimizing ``||reference - target @ Q||_F``.

    Solved by SVD of ``reference.T @ target``: with ``L D R^T`` that SVD,
    ``Q = R @ L.T``.  Reflections are allowed (full orthogonal group).
    """
    reference = np.asarray(reference, dtype=float)
    target = np.asarray(target, dtype=float)
    if reference.shape != target.shape or reference.ndim != 2:
        raise ValueError("reference and target must be matrices of equal shape")
    if reference.shape[1] == 0:
        raise ValueError("latent dimension must be positive")
    cross = reference.T @ target
    if not np.all(np.isfinite(cross)):
        raise ValueError("non-finite entries in Procrustes cross-product")
    L, _, Rt = np.linalg.svd(cross)
    return Rt.T @ L.T


def align_samples(samples) -> AlignedSamples:
    """Align every retained sample to the first one.

    The anchor configuration is the actor-mean matrix of the first retained
    sample; for variants without actor means the shared/first-layer positions
    anchor instead.
    """
    B = samples.n_samples
    use_eta = ModelVariant(samples.config.variant).has_actor_means
    anchor = samples.eta[0] if use_eta else samples.u[0, :, 0, :]
    K = anchor.shape[1]
    rotations = np.empty((B, K, K))
    u_tilde = np.empty_like(samples.u)
    eta_tilde = np.empty_like(samples.eta)
    for b in range(B):
        config = samples.eta[b] if use_eta else samples.u[b, :, 0, :]
        Q = procrustes_rotation(anchor, config)
        rotations[b] = Q
        u_tilde[b] = np.einsum("ijk,kl->ijl", samples.u[b], Q)
        eta_tilde[b] = samples.eta[b] @ Q
    return AlignedSamples(rotations, u_tilde, eta_tilde, 0)


# ---------------------------------------------------------------------------
# Consensus networks
# ---------------------------------------------------------------------------


def consensus_network(samples) -> np.ndarray:
    """Posterior-mean consensus affinity matrix from the actor means.

    Entry (i, i2) averages ``Phi(mu_zeta - exp(mu_theta) * ||eta_i - eta_i2||)``
    over the retained samples.  Rotation-invariant, so raw samples suffice.
    """
    if not ModelVariant(samples.config.variant).has_actor_means:
        raise ValueError("consensus network requires the hierarchical variant")
    I = samples.n_actors
    out = np.zeros((I, I))
    iu, iv = np.triu_indices(I, k=1)
    for b in range(samples.n_samples):
        eta = samples.eta[b]
        d = np.linalg.norm(eta[iu] - eta[iv], axis=1)
        mu_z, mu_t = samples.scalars[b, 1], samples.scalars[b, 3]
        vals = std_normal_cdf(mu_z - np.exp(mu_t) * d)
        out[iu, iv] += vals
    out /= samples.n_samples
    out = out + out.T
    return out


def empirical_consensus(net) -> np.ndarray:
    """Proportion of layers in which each dyad is tied."""
    return net.adjacency.mean(axis=2)


def majority_consensus(net, threshold: float = 0.5) -> np.ndarray:
    """Binary consensus: edge present when tied in >= threshold of layers."""
    counts = net.adjacency.sum(axis=2)
    out = (counts >= threshold * net.n_layers).astype(np.uint8)
    np.fill_diagonal(out, 0)
    return out


# ---------------------------------------------------------------------------
# Layer correlation and perception assessment
# ---------------------------------------------------------------------------


def _characteristic(u_tilde_b, stat: str) -> np.ndarray:
    """Per-actor scalar summary of aligned positions, (I, J_u)."""
    if stat == "max":
        return u_tilde_b.max(axis=2)
    if stat == "median":
        return np.median(u_tilde_b, axis=2)
    raise ValueError(f"unknown characteristic statistic {stat!r}")


def layer_correlation(aligned: AlignedSamples, stat: str = "max"):
    """Pairwise between-layer correlation summaries.

    Per sample, each actor in each layer is reduced to the maximum (or
    median) aligned coordinate; the correlation between layers is the Pearson
    correlation of those actor vectors, summarized over samples.  Returns a
    (J, J) object array of :class:`IntervalSummary` plus a count of samples
    dropped for zero variance.
    """
    B, I, J, _K = aligned.u_tilde.shape
    if B < 2 or I < 3:
        raise ValueError("need at least 2 samples and 3 actors")
    draws = np.full((B, J, J), np.nan)
    dropped = 0
    for b in range(B):
        ustar = _characteristic(aligned.u_tilde[b], stat)  # (I, J)
        sd = ustar.std(axis=0)
        if np.any(sd == 0.0):
            dropped += 1
            continue
        draws[b] = np.corrcoef(ustar.T)
    valid = ~np.isnan(draws[:, 0, 0])
    if not valid.any():
        raise ValueError("no sample had nondegenerate layer characteristics")
    table = np.empty((J, J), dtype=object)
    for j in range(J):
        for j2 in range(J):
            if j == j2:
                table[j, j2] = IntervalSummary(1.0, 1.0, 1.0)
            else:
                table[j, j2] = summarize(draws[valid, j, j2])
    return table, dropped


def assessment_index(aligned: AlignedSamples):
    """Perception-assessment summaries for reporter-layer (J = I) data.

    For each actor the per-sample index is the norm of the self-reported
    position minus the norm of the average position assigned by the other
    reporters; a significantly positive value flags inflated self-perception.
    """
    B, I, J, _K = aligned.u_tilde.shape
    if J != I:
        raise ValueError("assessment index requires one layer per reporter (J = I)")
    deltas = np.empty((B, I))
    for b in range(B):
        ut = aligned.u_tilde[b]  # (I, J, K)
        for i in range(I):
            self_norm = np.linalg.norm(ut[i, i])
            others = np.delete(ut[i], i, axis=0).mean(axis=0)
            deltas[b, i] = self_norm - np.linalg.norm(others)
    return [summarize(deltas[:, i]) for i in range(I)]


def position_summary(aligned: AlignedSamples) -> dict:
    """Posterior means/variances of aligned positions plus a dimension ranking.

    Dimensions are ranked by the across-actor variance of the posterior-mean
    actor-average configuration (anchor positions when actor means are all
    zero), descending; the first two ranked dimensions are the natural plot
    axes.
    """
    u_mean = aligned.u_tilde.mean(axis=0)          # (I, J_u, K)
    u_var = aligned.u_tilde.var(axis=0)            # (I, J_u, K)
    eta_mean = aligned.eta_tilde.mean(axis=0)      # (I, K)
    basis = eta_mean if np.any(eta_mean) else u_mean[:, 0, :]
    spread = basis.var(axis=0)
    ranking = np.argsort(-spread)
    return {
        "u_mean": u_mean,
        "u_var": u_var,
        "eta_mean": eta_mean,
        "eta_var": aligned.eta_tilde.var(axis=0),
        "dimension_ranking": ranking,
    }
