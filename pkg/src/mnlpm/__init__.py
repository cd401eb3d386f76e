"""Hierarchical Bayesian latent position models for multilayer networks.

Public surface: data containers and I/O (:mod:`mnlpm.netdata`), the
probability model and prior elicitation (:mod:`mnlpm.model`), the MCMC
sampler (:mod:`mnlpm.sampler`), identifiability post-processing
(:mod:`mnlpm.postprocess`), model checking (:mod:`mnlpm.diagnostics`),
cross-validated link prediction (:mod:`mnlpm.crossval`), and the ``mnlpm``
command-line tool (:mod:`mnlpm.cli`).
"""

__version__ = "1.0.0"

from .crossval import CvResult, VariantComparison, auc, compare_variants, predict_missing, run_cv
from .diagnostics import (
    GRAPH_STATISTICS,
    PpcCell,
    WaicReport,
    convergence_report,
    geweke_z,
    graph_statistic,
    posterior_predictive_check,
    replicate_network,
    waic,
    waic_scan,
)
from .model import (
    Hyperparameters,
    ModelVariant,
    ParameterState,
    elicit,
    elicitation_table_row,
    interaction_probability,
    log_likelihood,
    log_prior,
    mean_latent_distance,
    prior_predictive_probabilities,
    sample_prior,
    std_normal_cdf,
    std_normal_quantile,
)
from .netdata import (
    FoldAssignment,
    MultilayerNetwork,
    NetworkParseError,
    NetworkValidationError,
    apply_fold_mask,
    erdos_renyi,
    load_mask,
    load_network,
    make_folds,
    save_network,
    validate,
)
from .postprocess import (
    AlignedSamples,
    IntervalSummary,
    align_samples,
    assessment_index,
    consensus_network,
    empirical_consensus,
    layer_correlation,
    majority_consensus,
    position_summary,
    procrustes_rotation,
    summarize,
)
from .sampler import (
    AdaptConfig,
    FitConfig,
    PosteriorSamples,
    effective_sample_size,
    load_samples,
    resume_mcmc,
    run_mcmc,
    save_samples,
)

__all__ = [name for name in dir() if not name.startswith("_")]
