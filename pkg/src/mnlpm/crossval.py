"""Out-of-sample evaluation: fold-based link prediction and variant comparison."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .diagnostics import waic, waic_scan
from .model import ModelVariant, elicit
from .netdata import apply_fold_mask, make_folds
from .sampler import FitConfig, run_mcmc


@dataclass(frozen=True)
class CvResult:
    variant: ModelVariant
    K: int
    fold_aucs: tuple
    waic_full_fit: float
    n_degenerate_folds: int = 0

    @property
    def mean_auc(self) -> float:
        valid = [a for a in self.fold_aucs if not math.isnan(a)]
        return float(np.mean(valid)) if valid else math.nan


def auc(labels, scores) -> float:
    """Mann-Whitney AUC: P(score of a random positive > random negative),
    counting ties as one half.

    Returns NaN when the labels are single-class.
    """
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=float)
    if labels.shape != scores.shape:
        raise ValueError("labels and scores must have equal length")
    pos = labels == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        return math.nan
    ranks = rankdata(scores)  # average ranks handle ties as half-concordant
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def predict_missing(samples, net) -> list:
    """Posterior-mean edge probability for every masked triple.

    Returns ``[((i, i2, j), score), ...]`` over masked (i < i2) triples of
    ``net``, which must be the network the samples were fitted on.
    """
    variant = ModelVariant(samples.config.variant)
    I, J = net.n_actors, net.n_layers
    iu, iv = np.triu_indices(I, k=1)
    from scipy.special import ndtr

    out = []
    for j in range(J):
        missing = ~net.mask[iu, iv, j]
        if not missing.any():
            continue
        a, b = iu[missing], iv[missing]
        ju = 0 if variant.shares_positions else j
        d = np.linalg.norm(samples.u[:, a, ju, :] - samples.u[:, b, ju, :], axis=2)
        p = ndtr(samples.zeta[:, [j]] - np.exp(samples.theta[:, [j]]) * d)
        scores = p.mean(axis=0)
        out.extend((((int(i), int(i2), j), float(s))
                    for i, i2, s in zip(a, b, scores)))
    if not out:
        raise ValueError("network has no masked triples to predict")
    return out


def run_cv(net, variant, K, F: int = 5, config: FitConfig | None = None,
           seed: int = 0, theta0: float = 0.1) -> CvResult:
    """F-fold link-prediction cross-validation at a fixed latent dimension.

    Each fold is masked out, the model refitted on the remainder, and the
    held-out dyads scored by their posterior-mean edge probability; a full-
    data fit supplies the accompanying WAIC.  Folds whose held-out labels are
    single-class are excluded from the mean with a warning.
    """
    variant = ModelVariant(variant)
    base = config or FitConfig()
    hyper = elicit(K, theta0)
    folds = make_folds(net, F, seed=seed)
    child_seeds = np.random.SeedSequence(seed).generate_state(F + 1)
    aucs = []
    n_degenerate = 0
    for f in range(F):
        masked = apply_fold_mask(net, folds, f)
        cfg = FitConfig(variant=variant, K=K, n_burn=base.n_burn,
                        n_thin=base.n_thin, n_keep=base.n_keep,
                        seed=int(child_seeds[f]), adapt=base.adapt)
        fit = run_mcmc(masked, hyper, cfg)
        preds = predict_missing(fit, masked)
        labels = np.array([net.adjacency[t[0], t[1], t[2]] for t, _ in preds])
        scores = np.array([s for _, s in preds])
        a = auc(labels, scores)
        if math.isnan(a):
            n_degenerate += 1
            warnings.warn(f"fold {f} held out single-class labels; AUC skipped")
        aucs.append(a)
    full_cfg = FitConfig(variant=variant, K=K, n_burn=base.n_burn,
                         n_thin=base.n_thin, n_keep=base.n_keep,
                         seed=int(child_seeds[F]), adapt=base.adapt)
    full_fit = run_mcmc(net, hyper, full_cfg)
    return CvResult(variant, K, tuple(aucs), waic(full_fit, net).waic,
                    n_degenerate)


@dataclass(frozen=True)
class VariantComparison:
    """Per-variant optimal-K WAIC scans plus CV results at the optimum."""

    scan_rows: dict = field(default_factory=dict)   # variant -> [(K, waic, ...)]
    results: dict = field(default_factory=dict)     # variant -> CvResult


def compare_variants(net, K_range, config: FitConfig | None = None, F: int = 5,
                     seed: int = 0, variants=("IFLPM", "GMLPM", "MNLPM"),
                     theta0: float = 0.1) -> VariantComparison:
    """The model-comparison table: per variant, pick K by full-data WAIC, then
    cross-validate at that K."""
    base = config or FitConfig()
    comparison = VariantComparison()
    for v in variants:
        variant = ModelVariant(v)
        rows, best_K, _fits = waic_scan(net, variant, K_range, base, theta0)
        comparison.scan_rows[variant] = rows
        comparison.results[variant] = run_cv(
            net, variant, best_K, F=F, config=base, seed=seed, theta0=theta0
        )
    return comparison
