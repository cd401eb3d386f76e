"""Command-line surface: elicit, fit, report, waic-scan, cv, simulate.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
Every command writes a ``manifest.json`` into its output directory recording
the resolved configuration, input digests, seed, and timestamps; re-running
from the same manifest reproduces outputs byte-identically in single-job
mode.  A JSON config file may pre-populate any flag (flags win); the
``MNLPM_SEED`` environment variable is the seed fallback.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .crossval import compare_variants
from .diagnostics import convergence_report, posterior_predictive_check, waic, waic_scan
from .model import (
    Hyperparameters,
    elicit,
    elicitation_table_row,
    sample_prior,
)
from .netdata import (
    MultilayerNetwork,
    NetworkParseError,
    NetworkValidationError,
    erdos_renyi,
    load_mask,
    load_network,
    save_network,
)
from .postprocess import (
    align_samples,
    assessment_index,
    consensus_network,
    layer_correlation,
    position_summary,
)
from .sampler import (
    AdaptConfig,
    FitConfig,
    load_samples,
    run_mcmc,
    save_samples,
)

USAGE_ERROR, DATA_ERROR, NUMERIC_ERROR = 2, 3, 4

PRESETS = {
    "quick": {"burn": 2000, "thin": 1, "keep": 1000},
    "paper": {"burn": 100_000, "thin": 10, "keep": 10_000},
}


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("MNLPM_SEED")
    if env is not None:
        return int(env)
    return 0


def _write_manifest(out_dir, command, resolved, inputs, seed, started):
    os.makedirs(out_dir, exist_ok=True)
    manifest = {
        "command": command,
        "config": resolved,
        "input_digests": {p: _digest(p) for p in inputs if p and os.path.exists(p)},
        "seed": seed,
        "tool_version": __version__,
        "started": started,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


def _load_data(args) -> MultilayerNetwork:
    try:
        net = load_network(args.data, format=args.format)
        if getattr(args, "mask", None):
            net = load_mask(net, args.mask)
        return net
    except FileNotFoundError as exc:
        raise CliError(str(exc), DATA_ERROR) from exc
    except (NetworkParseError, NetworkValidationError) as exc:
        raise CliError(str(exc), DATA_ERROR) from exc


def _fit_config(args) -> FitConfig:
    burn, thin, keep = args.burn, args.thin, args.keep
    if args.preset:
        preset = PRESETS[args.preset]
        burn = preset["burn"] if burn is None else burn
        thin = preset["thin"] if thin is None else thin
        keep = preset["keep"] if keep is None else keep
    defaults = PRESETS["paper"]
    return FitConfig(
        variant=args.variant,
        K=args.k,
        n_burn=defaults["burn"] if burn is None else burn,
        n_thin=defaults["thin"] if thin is None else thin,
        n_keep=defaults["keep"] if keep is None else keep,
        seed=_resolve_seed(args),
        adapt=AdaptConfig(),
    )


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_elicit(args):
    try:
        hyper = elicit(args.k, args.theta0)
    except ValueError as exc:
        raise CliError(str(exc), USAGE_ERROR) from exc
    row = elicitation_table_row(hyper)
    text = hyper.to_json()
    if args.out == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(
        "K={K} E[d]={mean_distance:.3f} sd[d]={sd_distance:.3f} "
        "b_zeta={b_zeta:.3f} b_theta={b_theta:.3f} b_sigma={b_sigma:.3f} "
        "b_kappa={b_kappa:.3f} v_zeta={v_zeta:.3f} v_theta={v_theta:.3f} "
        "v_nu={v_nu:.3f}".format(**row),
        file=sys.stderr,
    )
    return 0


def cmd_fit(args):
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    net = _load_data(args)
    config = _fit_config(args)
    hyper = elicit(config.K, args.theta0)
    try:
        samples = run_mcmc(
            net, hyper, config,
            checkpoint_every=args.checkpoint_every,
            checkpoint_dir=args.out_dir if args.checkpoint_every else None,
        )
    except FloatingPointError as exc:
        raise CliError(str(exc), NUMERIC_ERROR) from exc
    save_samples(samples, args.out_dir)
    _write_manifest(args.out_dir, "fit", config.to_dict(),
                    [args.data, getattr(args, "mask", None)], config.seed, started)
    print(f"retained {samples.n_samples} samples in {args.out_dir}", file=sys.stderr)
    return 0


def _report_consensus(samples, net, out_dir):
    mat = consensus_network(samples)
    np.savetxt(os.path.join(out_dir, "consensus.csv"), mat, delimiter=",",
               fmt="%.6f")


def _report_correlation(samples, net, out_dir, stat):
    aligned = align_samples(samples)
    table, dropped = layer_correlation(aligned, stat=stat)
    J = samples.n_layers
    rows = []
    for j in range(J):
        for j2 in range(j + 1, J):
            cell = table[j, j2]
            rows.append((j + 1, j2 + 1, f"{cell.point:.6f}", f"{cell.lo:.6f}",
                         f"{cell.hi:.6f}"))
    _write_csv(os.path.join(out_dir, "correlation.csv"),
               ("layer_a", "layer_b", "mean", "lo", "hi"), rows)
    if dropped:
        print(f"dropped {dropped} degenerate samples", file=sys.stderr)


def _report_delta(samples, net, out_dir):
    if net.n_layers != net.n_actors:
        raise CliError("assessment report requires one layer per reporter "
                       f"(J = I); got I={net.n_actors}, J={net.n_layers}",
                       USAGE_ERROR)
    aligned = align_samples(samples)
    rows = []
    for i, cell in enumerate(assessment_index(aligned)):
        rows.append((i + 1, f"{cell.point:.6f}", f"{cell.lo:.6f}",
                     f"{cell.hi:.6f}", int(cell.significant)))
    _write_csv(os.path.join(out_dir, "delta.csv"),
               ("actor", "mean", "lo", "hi", "significant"), rows)


def _report_positions(samples, net, out_dir, svg):
    aligned = align_samples(samples)
    summary = position_summary(aligned)
    rows = []
    I, J_u, K = summary["u_mean"].shape
    for i in range(I):
        for j in range(J_u):
            for k in range(K):
                rows.append((i + 1, j + 1, k + 1,
                             f"{summary['u_mean'][i, j, k]:.6f}",
                             f"{summary['u_var'][i, j, k]:.6f}"))
    _write_csv(os.path.join(out_dir, "positions.csv"),
               ("actor", "layer", "dim", "mean", "var"), rows)
    if svg:
        _plot_positions(summary, net, out_dir)


def _plot_positions(summary, net, out_dir):
    import matplotlib

    matplotlib.use("svg")
    import matplotlib.pyplot as plt

    d1, d2 = summary["dimension_ranking"][:2] if summary["u_mean"].shape[2] > 1 \
        else (0, 0)
    u = summary["u_mean"]
    J_u = u.shape[1]
    fig, axes = plt.subplots(1, J_u, figsize=(4 * J_u, 4), squeeze=False)
    for j in range(J_u):
        ax = axes[0, j]
        ax.scatter(u[:, j, d1], u[:, j, d2], s=18)
        for i in range(u.shape[0]):
            ax.annotate(net.actor_labels[i], (u[i, j, d1], u[i, j, d2]),
                        fontsize=7)
        title = net.layer_labels[j] if J_u == net.n_layers else "shared"
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "positions.svg"))
    plt.close(fig)


def _report_ppc(samples, net, out_dir, n_replicates, seed):
    cells = posterior_predictive_check(samples, net,
                                       n_replicates=n_replicates, seed=seed)
    rows = [(c.layer + 1, c.statistic, f"{c.observed:.6f}", f"{c.mean:.6f}",
             f"{c.lo:.6f}", f"{c.hi:.6f}", int(c.contained)) for c in cells]
    _write_csv(os.path.join(out_dir, "ppc.csv"),
               ("layer", "statistic", "observed", "mean", "lo", "hi",
                "contained"), rows)


def _report_waic(samples, net, out_dir):
    rep = waic(samples, net)
    _write_csv(os.path.join(out_dir, "waic.csv"),
               ("K", "waic", "p_waic", "lppd"),
               [(samples.latent_dim, f"{rep.waic:.6f}", f"{rep.p_waic:.6f}",
                 f"{rep.lppd:.6f}")])
    print(f"WAIC={rep.waic:.2f} p_WAIC={rep.p_waic:.2f}", file=sys.stderr)


def _report_convergence(samples, net, out_dir):
    rows = [(name, f"{ess:.1f}", f"{mean:.6f}", f"{sd:.6f}", f"{z:.4f}")
            for name, ess, mean, sd, z in convergence_report(samples)]
    _write_csv(os.path.join(out_dir, "convergence.csv"),
               ("parameter", "ess", "mean", "sd", "geweke_z"), rows)


def cmd_report(args):
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    net = _load_data(args)
    try:
        samples = load_samples(args.samples)
    except (FileNotFoundError, ValueError) as exc:
        raise CliError(str(exc), DATA_ERROR) from exc
    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)
    try:
        if args.which == "consensus":
            _report_consensus(samples, net, out_dir)
        elif args.which == "correlation":
            _report_correlation(samples, net, out_dir, args.stat)
        elif args.which == "delta":
            _report_delta(samples, net, out_dir)
        elif args.which == "positions":
            _report_positions(samples, net, out_dir, args.svg)
        elif args.which == "ppc":
            _report_ppc(samples, net, out_dir, args.replicates,
                        _resolve_seed(args))
        elif args.which == "waic":
            _report_waic(samples, net, out_dir)
        elif args.which == "convergence":
            _report_convergence(samples, net, out_dir)
    except ValueError as exc:
        raise CliError(str(exc), USAGE_ERROR) from exc
    _write_manifest(out_dir, f"report:{args.which}", vars_without(args),
                    [args.data, args.samples + "/samples.bin"],
                    _resolve_seed(args), started)
    return 0


def _parse_k_range(text):
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(p) for p in text.split(",")]


def cmd_waic_scan(args):
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    net = _load_data(args)
    base = _fit_config_scan(args)
    rows, best_K, _ = waic_scan(net, args.variant, _parse_k_range(args.k_range),
                                base, args.theta0)
    os.makedirs(args.out_dir, exist_ok=True)
    _write_csv(os.path.join(args.out_dir, "waic.csv"),
               ("K", "waic", "p_waic", "lppd"),
               [(K, f"{w:.6f}", f"{p:.6f}", f"{l:.6f}") for K, w, p, l in rows])
    print(f"argmin K = {best_K}")
    _write_manifest(args.out_dir, "waic-scan", vars_without(args), [args.data],
                    base.seed, started)
    return 0


def _fit_config_scan(args):
    ns = argparse.Namespace(**vars(args))
    ns.k = 1  # placeholder; the scan supplies K per fit
    return _fit_config(ns)


def cmd_cv(args):
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    if args.folds < 2:
        raise CliError("need at least 2 folds", USAGE_ERROR)
    net = _load_data(args)
    base = _fit_config_scan(args)
    comparison = compare_variants(
        net, _parse_k_range(args.k_range), config=base, F=args.folds,
        seed=_resolve_seed(args), variants=args.variants.split(","),
        theta0=args.theta0,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    fold_rows, summary_rows = [], []
    for variant, result in comparison.results.items():
        for f, a in enumerate(result.fold_aucs):
            fold_rows.append((variant.value, result.K, f + 1,
                              "nan" if math.isnan(a) else f"{a:.6f}"))
        summary_rows.append((variant.value, result.K,
                             f"{result.mean_auc:.6f}",
                             f"{result.waic_full_fit:.6f}"))
    _write_csv(os.path.join(args.out_dir, "cv.csv"),
               ("variant", "K", "fold", "auc"), fold_rows)
    _write_csv(os.path.join(args.out_dir, "cv_summary.csv"),
               ("variant", "K", "mean_auc", "waic"), summary_rows)
    for row in summary_rows:
        print("\t".join(str(v) for v in row))
    _write_manifest(args.out_dir, "cv", vars_without(args), [args.data],
                    _resolve_seed(args), started)
    return 0


def cmd_simulate(args):
    seed = _resolve_seed(args)
    if args.from_prior:
        if args.k is None:
            raise CliError("--from-prior requires --k", USAGE_ERROR)
        from .diagnostics import replicate_network

        hyper = elicit(args.k, args.theta0)
        state = sample_prior(hyper, args.actors, args.layers, seed=seed)
        rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
        net = replicate_network(state, "MNLPM", (args.actors, args.layers), rng)
    else:
        if args.prob is None:
            raise CliError("need --prob or --from-prior", USAGE_ERROR)
        try:
            net = erdos_renyi(args.actors, args.layers, args.prob, seed=seed)
        except ValueError as exc:
            raise CliError(str(exc), USAGE_ERROR) from exc
    if args.out == "-":
        import io

        buf = io.StringIO()
        _write_edge_list(net, buf)
        sys.stdout.write(buf.getvalue())
    else:
        save_network(net, args.out, format="edge-list")
    return 0


def _write_edge_list(net, fh):
    fh.write(f"{net.n_actors} {net.n_layers}\n")
    iu, iv = np.triu_indices(net.n_actors, k=1)
    for j in range(net.n_layers):
        present = net.adjacency[iu, iv, j] == 1
        for i, i2 in zip(iu[present], iv[present]):
            fh.write(f"{j + 1} {i + 1} {i2 + 1}\n")


def vars_without(args, drop=("func",)):
    return {k: v for k, v in vars(args).items() if k not in drop}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_data_args(p):
    p.add_argument("--data", required=True, help="network file")
    p.add_argument("--format", choices=("edge-list", "adjacency-matrix"),
                   default="edge-list")
    p.add_argument("--mask", help="optional mask file of missing triples")


def _add_fit_args(p):
    p.add_argument("--variant", choices=("MNLPM", "IFLPM", "GMLPM"),
                   default="MNLPM")
    p.add_argument("--burn", type=int, default=None,
                   help="burn-in sweeps (default 100000)")
    p.add_argument("--thin", type=int, default=None,
                   help="keep every n-th sweep (default 10)")
    p.add_argument("--keep", type=int, default=None,
                   help="retained samples (default 10000)")
    p.add_argument("--preset", choices=tuple(PRESETS), default=None)
    p.add_argument("--seed", type=int, default=None,
                   help="RNG seed (fallback: MNLPM_SEED, then 0)")
    p.add_argument("--theta0", type=float, default=0.1,
                   help="prior edge probability for elicitation")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker hint; runs are sequential and reproducible")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mnlpm",
        description="Hierarchical Bayesian latent position models for "
                    "multilayer networks",
    )
    parser.add_argument("--config", help="JSON file of default flag values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("elicit", help="emit elicited hyperparameters")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--theta0", type=float, default=0.1)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_elicit)

    p = sub.add_parser("fit", help="run the MCMC sampler")
    _add_data_args(p)
    _add_fit_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--checkpoint-every", type=int, default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("report", help="post-processing and diagnostics")
    _add_data_args(p)
    p.add_argument("--samples", required=True, help="fit output directory")
    p.add_argument("--which", required=True,
                   choices=("consensus", "correlation", "delta", "positions",
                            "ppc", "waic", "convergence"))
    p.add_argument("--out-dir", required=True)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--stat", choices=("max", "median"), default="max")
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("waic-scan", help="fit a range of latent dimensions")
    _add_data_args(p)
    _add_fit_args(p)
    p.add_argument("--k-range", default="1..6")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_waic_scan)

    p = sub.add_parser("cv", help="cross-validated variant comparison")
    _add_data_args(p)
    _add_fit_args(p)
    p.add_argument("--k-range", default="1..6")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--variants", default="IFLPM,GMLPM,MNLPM")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("simulate", help="write a synthetic dataset")
    p.add_argument("--actors", type=int, required=True)
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--prob", type=float, default=None)
    p.add_argument("--from-prior", action="store_true")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--theta0", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_simulate)

    return parser


def _apply_config_file(parser, argv):
    """Use a JSON config file as flag defaults; command-line flags override."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    path = argv[idx + 1]
    with open(path) as fh:
        values = json.load(fh)
    extra = []
    for key, val in values.items():
        flag = "--" + key.replace("_", "-")
        if flag not in argv:
            if isinstance(val, bool):
                if val:
                    extra.append(flag)
            else:
                extra.extend([flag, str(val)])
    return argv + extra


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if "--config" in argv:
            argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
