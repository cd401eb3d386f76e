"""Model selection, posterior predictive checks, and convergence reporting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import shortest_path
from scipy.special import log_ndtr, logsumexp

from .model import ModelVariant, elicit
from .netdata import MultilayerNetwork
from .sampler import FitConfig, effective_sample_size, run_mcmc

GRAPH_STATISTICS = (
    "density", "clustering_coefficient", "assortativity",
    "mean_geodesic", "mean_eigen_centrality", "mean_degree",
)


@dataclass(frozen=True)
class WaicReport:
    """Widely applicable information criterion with its complexity penalty."""

    waic: float
    p_waic: float
    lppd: float
    per_point: np.ndarray  # (n_points, 2): lppd_i, p_waic_i


def _pointwise_logp(samples, net) -> tuple:
    """Per-sample Bernoulli log-densities of the observed triples, (B, M)."""
    variant = ModelVariant(samples.config.variant)
    B, I, J = samples.n_samples, samples.n_actors, samples.n_layers
    iu, iv = np.triu_indices(I, k=1)
    cols = []
    for j in range(J):
        obs = net.mask[iu, iv, j]
        if not obs.any():
            continue
        a, b = iu[obs], iv[obs]
        y = net.adjacency[a, b, j].astype(bool)
        ju = 0 if variant.shares_positions else j
        diff = samples.u[:, a, ju, :] - samples.u[:, b, ju, :]
        d = np.linalg.norm(diff, axis=2)  # (B, m_j)
        x = samples.zeta[:, [j]] - np.exp(samples.theta[:, [j]]) * d
        cols.append(np.where(y[None, :], log_ndtr(x), log_ndtr(-x)))
    if not cols:
        raise ValueError("no observed triples")
    return np.concatenate(cols, axis=1)


def waic(samples, net) -> WaicReport:
    """WAIC over observed unordered dyad-layer triples.

    ``lppd`` terms use a log-sum-exp over retained samples; the penalty is
    ``2 * (lppd_i - E[log p_i])`` per point.
    """
    if samples.n_samples < 2:
        raise ValueError("WAIC needs at least 2 retained samples")
    logp = _pointwise_logp(samples, net)  # (B, M)
    B = logp.shape[0]
    lppd_i = logsumexp(logp, axis=0) - math.log(B)
    p_i = 2.0 * (lppd_i - logp.mean(axis=0))
    lppd = float(lppd_i.sum())
    p_waic = float(p_i.sum())
    return WaicReport(
        waic=-2.0 * lppd + 2.0 * p_waic,
        p_waic=p_waic,
        lppd=lppd,
        per_point=np.column_stack([lppd_i, p_i]),
    )


def waic_scan(net, variant, K_set, base_config: FitConfig, theta0: float = 0.1):
    """Fit one model per latent dimension and tabulate WAIC.

    Each K gets its own elicited hyperparameters so models are comparable.
    Returns (rows, argmin_K, fits) where rows are (K, waic, p_waic, lppd)
    tuples; a failed fit contributes a row of NaNs.
    """
    rows, fits = [], {}
    for K in K_set:
        cfg = FitConfig(
            variant=variant, K=K, n_burn=base_config.n_burn,
            n_thin=base_config.n_thin, n_keep=base_config.n_keep,
            seed=base_config.seed, adapt=base_config.adapt,
        )
        try:
            hyper = elicit(K, theta0)
            fit = run_mcmc(net, hyper, cfg)
            report = waic(fit, net)
            rows.append((K, report.waic, report.p_waic, report.lppd))
            fits[K] = fit
        except Exception:  # noqa: BLE001 - propagate per-K failures as NaN rows
            rows.append((K, math.nan, math.nan, math.nan))
    finite = [(w, K) for K, w, _, _ in rows if math.isfinite(w)]
    if not finite:
        raise RuntimeError("every fit in the WAIC scan failed")
    best_K = min(finite)[1]
    return rows, best_K, fits


# ---------------------------------------------------------------------------
# Posterior predictive machinery
# ---------------------------------------------------------------------------


def replicate_network(state, variant, net_shape, rng) -> MultilayerNetwork:
    """One pseudo-dataset drawn from the edge probabilities of ``state``.

    ``net_shape`` is ``(I, J)``.
    """
    from scipy.special import ndtr

    variant = ModelVariant(variant)
    I, J = net_shape
    adj = np.zeros((I, I, J), dtype=np.uint8)
    iu, iv = np.triu_indices(I, k=1)
    for j in range(J):
        pos = state.positions(0 if variant.shares_positions else j)
        d = np.linalg.norm(pos[iu] - pos[iv], axis=1)
        p = ndtr(state.zeta[j] - math.exp(state.theta[j]) * d)
        draws = (rng.random(p.size) < p).astype(np.uint8)
        adj[iu, iv, j] = draws
        adj[iv, iu, j] = draws
    return MultilayerNetwork(adj, None)


def graph_statistic(layer: np.ndarray, stat: str) -> float:
    """Scalar summary of a symmetric binary adjacency matrix.

    Undefined cases (assortativity with degenerate degrees, geodesics on an
    edgeless graph) return NaN.
    """
    A = np.asarray(layer, dtype=float)
    I = A.shape[0]
    np.fill_diagonal(A, 0.0)
    deg = A.sum(axis=1)
    n_edges = deg.sum() / 2.0
    if stat == "density":
        return float(n_edges / (I * (I - 1) / 2.0))
    if stat == "mean_degree":
        return float(2.0 * n_edges / I)
    if stat == "clustering_coefficient":
        triples = float(np.sum(deg * (deg - 1) / 2.0))
        if triples == 0.0:
            return 0.0
        triangles = float(np.trace(A @ A @ A)) / 6.0
        return 3.0 * triangles / triples
    if stat == "assortativity":
        src, dst = np.nonzero(A)
        if src.size == 0:
            return math.nan
        x, y = deg[src], deg[dst]
        if x.std() == 0.0 or y.std() == 0.0:
            return math.nan
        return float(np.corrcoef(x, y)[0, 1])
    if stat == "mean_geodesic":
        if n_edges == 0:
            return math.nan
        sp = shortest_path(A, method="D", unweighted=True)
        iu, iv = np.triu_indices(I, k=1)
        finite = np.isfinite(sp[iu, iv])
        if not finite.any():
            return math.nan
        return float(sp[iu, iv][finite].mean())
    if stat == "mean_eigen_centrality":
        if n_edges == 0:
            return math.nan
        vals, vecs = np.linalg.eigh(A)
        v = np.abs(vecs[:, -1])
        return float((v / v.max()).mean())
    raise ValueError(f"unknown statistic {stat!r}")


@dataclass(frozen=True)
class PpcCell:
    layer: int
    statistic: str
    observed: float
    mean: float
    lo: float
    hi: float

    @property
    def contained(self) -> bool:
        if math.isnan(self.observed) or math.isnan(self.lo):
            return False
        return self.lo <= self.observed <= self.hi


def posterior_predictive_check(samples, net, n_replicates=None,
                               statistics=GRAPH_STATISTICS, seed=0) -> list:
    """Compare observed graph statistics against replicated pseudo-data.

    One replicate per retained state (evenly subsampled when
    ``n_replicates < B``); undefined replicate values are dropped from the
    interval.  Returns a list of :class:`PpcCell`.
    """
    B = samples.n_samples
    if n_replicates is None:
        n_replicates = B
    if n_replicates > B:
        raise ValueError("cannot draw more replicates than retained states")
    idx = np.linspace(0, B - 1, n_replicates).round().astype(int)
    rng = np.random.default_rng(seed)
    I, J = net.n_actors, net.n_layers
    variant = samples.config.variant
    values = np.full((n_replicates, J, len(statistics)), np.nan)
    for r, b in enumerate(idx):
        rep = replicate_network(samples.state(b), variant, (I, J), rng)
        for j in range(J):
            for s, stat in enumerate(statistics):
                values[r, j, s] = graph_statistic(rep.layer(j), stat)
    report = []
    for j in range(J):
        for s, stat in enumerate(statistics):
            observed = graph_statistic(net.layer(j), stat)
            col = values[:, j, s]
            col = col[~np.isnan(col)]
            if col.size == 0:
                report.append(PpcCell(j, stat, observed, math.nan, math.nan,
                                      math.nan))
                continue
            lo, hi = np.quantile(col, [0.025, 0.975])
            report.append(PpcCell(j, stat, observed, float(col.mean()),
                                  float(lo), float(hi)))
    return report


# ---------------------------------------------------------------------------
# Convergence reporting
# ---------------------------------------------------------------------------


def geweke_z(trace, first: float = 0.1, last: float = 0.5) -> float:
    """Geweke-style z-score comparing early and late chain segments.

    Segment variances are autocorrelation-adjusted via the effective sample
    size.  Constant traces score 0 by convention.
    """
    x = np.asarray(trace, dtype=float)
    n = x.size
    a = x[: max(int(first * n), 10)]
    b = x[-max(int(last * n), 10):]
    if a.std() == 0.0 and b.std() == 0.0:
        return 0.0
    var_a = a.var(ddof=1) / effective_sample_size(a)
    var_b = b.var(ddof=1) / effective_sample_size(b)
    denom = math.sqrt(var_a + var_b)
    if denom == 0.0:
        return 0.0
    return float((a.mean() - b.mean()) / denom)


def convergence_report(samples) -> list:
    """(name, ess, mean, sd, geweke_z) rows for the scalar parameter blocks."""
    if samples.n_samples < 100:
        raise ValueError("convergence report needs at least 100 samples")
    variant = ModelVariant(samples.config.variant)
    traces = {}
    if variant is not ModelVariant.IFLPM:
        traces["mu_zeta"] = samples.scalars[:, 1]
        traces["mu_theta"] = samples.scalars[:, 3]
        traces["kappa2"] = samples.scalars[:, 5]
        if variant.has_actor_means:
            traces["sigma2"] = samples.scalars[:, 0]
    for j in range(samples.n_layers):
        traces[f"zeta_{j + 1}"] = samples.zeta[:, j]
        traces[f"theta_{j + 1}"] = samples.theta[:, j]
    traces["loglik"] = samples.loglik_trace
    rows = []
    for name, tr in traces.items():
        rows.append((name, effective_sample_size(tr), float(np.mean(tr)),
                     float(np.std(tr)), geweke_z(tr)))
    return rows
