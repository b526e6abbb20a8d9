"""Command-line pipeline driver.

Every subcommand is deterministic under fixed flags and seed; seeds are
mandatory on stochastic subcommands. Exit codes: 0 success, 1 runtime or
I/O failure, 2 usage or validation error.
"""

import argparse
import os
import sys

import numpy as np

from . import grouping, io, mixture, synth
from .config import load_pipeline_config
from .errors import DegenerateDataError, DomainError, RaicarnError
from .ica import IcaConfig, residual_sd, run_group_ica, run_single_ica, z_scale
from .null import NullConfig, run_raicar_n

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DomainError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (RaicarnError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="raicarn",
        description="Reproducibility analysis of repeated spatial-map decompositions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic run collection")
    p.add_argument("--K", type=int, required=True, help="number of runs")
    p.add_argument("--nc", type=int, required=True, help="components per run")
    p.add_argument("--planted", type=int, required=True, help="reproducible components")
    p.add_argument("--overlap", type=float, default=0.9, help="planted cross-run correlation target")
    p.add_argument("--n", type=int, required=True, help="locations per map")
    p.add_argument("--family", default="laplacian", choices=synth.SOURCE_FAMILIES)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ica", help="single or group decomposition of data matrices")
    p.add_argument("data", nargs="+", help="input matrix file(s)")
    p.add_argument("--q", type=int, default=None, help="model order")
    p.add_argument("--nonlinearity", choices=("tanh", "cubic"), default=None)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--group", action="store_true", help="stack inputs time-wise before decomposing")
    p.add_argument("--raw", action="store_true", help="emit raw component maps instead of z-scaled")
    p.add_argument("--config", default=None, help="pipeline config file supplying defaults")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ica)

    p = sub.add_parser("raicarn", help="reproducibility analysis with permutation p-values")
    p.add_argument("manifest", help="run manifest file")
    p.add_argument("--R", type=int, default=None, help="null replicates")
    p.add_argument("--pcrit", type=float, default=None, help="significance cutoff")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=1, help="worker cap for null replicates")
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_raicarn)

    p = sub.add_parser("plan-groups", help="choose a group size and sample groups")
    p.add_argument("--N", type=int, required=True, help="subject count")
    p.add_argument("--alpha", type=float, required=True, help="pair co-occurrence cap")
    # K > 50 gives equivalent results in practice; 50 is a default, not a cap.
    p.add_argument("--K", type=int, default=50, help="number of groups (default 50)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plan_groups)

    p = sub.add_parser("mixture", help="tail-mixture display of significant components")
    p.add_argument("--report", required=True, help="reproducibility report file")
    p.add_argument("--manifest", required=True, help="run manifest the report was computed from")
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mixture)

    return parser


def _outdir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _config_section(args, section):
    if getattr(args, "config", None) is None:
        return {}
    cfg = load_pipeline_config(args.config)
    return getattr(cfg, section)


def _pick(flag_value, cfg, key, default):
    if flag_value is not None:
        return flag_value
    return cfg.get(key, default)


def cmd_simulate(args) -> int:
    spec = synth.PlantSpec(
        n=args.n, n_C=args.nc, K=args.K, n_planted=args.planted,
        overlap=args.overlap, noise_kind=args.family, seed=args.seed,
    )
    rc, labels = synth.planted_runset(spec)
    out = _outdir(args)
    run_files = []
    for r in range(rc.K):
        name = f"run{r:02d}.rnm"
        io.write_matrix(rc.maps[r], os.path.join(out, name))
        run_files.append(name)
    io.write_manifest(run_files, os.path.join(out, "manifest.txt"))
    lines = ["# planted ground truth (1-based run:component pairs per base map)"]
    for b, per_run in enumerate(labels, start=1):
        slots = " ".join(f"{r + 1}:{c + 1}" for r, c in enumerate(per_run))
        lines.append(f"base{b} = {slots}")
    io.write_text(os.path.join(out, "truth.txt"), lines)
    print(f"wrote {rc.K} runs to {out}")
    return EXIT_OK


def cmd_ica(args) -> int:
    cfg_ica = _config_section(args, "ica")
    q = _pick(args.q, cfg_ica, "q", None)
    if q is None:
        raise UsageError("model order --q is required (flag or config)")
    cfg = IcaConfig(
        q=q,
        nonlinearity=_pick(args.nonlinearity, cfg_ica, "nonlinearity", "tanh"),
        max_iters=_pick(args.max_iters, cfg_ica, "max_iters", 500),
        tol=_pick(args.tol, cfg_ica, "tol", 1e-6),
        seed=args.seed,
    )
    mats = [io.read_matrix(p) for p in args.data]
    if args.group:
        model = run_group_ica(mats, cfg)
        Y = np.vstack([m - m.mean(axis=1, keepdims=True) for m in mats])
    else:
        if len(mats) != 1:
            raise UsageError("single-run mode takes exactly one data file (use --group)")
        model = run_single_ica(mats[0], cfg)
        Y = mats[0]
    out = _outdir(args)
    maps = model.S if args.raw else z_scale(model.S, residual_sd(Y, model))
    io.write_matrix(maps, os.path.join(out, "components.rnm"))
    io.write_matrix(model.A, os.path.join(out, "mixing.rnm"))
    io.write_matrix(model.mu[None, :], os.path.join(out, "mean.rnm"))
    io.write_text(
        os.path.join(out, "model.txt"),
        [
            "# decomposition summary",
            f"q = {model.q}",
            f"sigma2 = {model.sigma2!r}",
            f"converged = {'true' if model.converged else 'false'}",
            f"scaled = {'raw' if args.raw else 'z'}",
        ],
    )
    print(f"wrote {model.q} components to {out}")
    return EXIT_OK


def cmd_raicarn(args) -> int:
    cfg_null = _config_section(args, "null")
    cfg = NullConfig(
        R=_pick(args.R, cfg_null, "R", 100),
        seed=args.seed,
        p_crit=_pick(args.pcrit, cfg_null, "p_crit", 0.05),
    )
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    rc = io.load_runs(args.manifest)
    report = run_raicar_n(rc, cfg, threads=args.threads)
    out = _outdir(args)
    io.write_report(report, os.path.join(out, "report.txt"))
    n_sig = int(report.significant.sum())
    print(f"{n_sig} of {report.n_C} components significant at p < {cfg.p_crit}")
    return EXIT_OK


def cmd_plan_groups(args) -> int:
    plan = grouping.plan_groups(args.N, args.alpha, args.K, args.seed)
    out = _outdir(args)
    lines = [
        "# group sampling plan",
        f"N = {plan.N}",
        f"alpha_max = {plan.alpha_max!r}",
        f"L = {plan.L}",
        f"K = {plan.K}",
        f"pair_probability = {grouping.pair_probability(plan.N, plan.L)!r}",
    ]
    for g in plan.groups:
        lines.append("group = " + " ".join(str(s + 1) for s in g))
    io.write_text(os.path.join(out, "plan.txt"), lines)
    print(f"L = {plan.L}, {plan.K} groups written to {out}")
    return EXIT_OK


def cmd_mixture(args) -> int:
    cfg_mix = _config_section(args, "mixture")
    max_iters = _pick(args.max_iters, cfg_mix, "max_iters", 500)
    tol = _pick(args.tol, cfg_mix, "tol", 1e-9)
    report = io.read_report(args.report)
    rc = io.load_runs(args.manifest)
    out = _outdir(args)
    n_done = 0
    for rank, (mc, sig) in enumerate(zip(report.matched, report.significant), start=1):
        if not sig:
            continue
        aligned = np.stack([sign * rc.maps[run, comp] for run, comp, sign in mc.members])
        normalized = mixture.normalize_maps(aligned)
        t_map, degenerate = mixture.group_tstat(normalized)
        try:
            fit = mixture.fit_mixture(t_map, max_iters=max_iters, tol=tol, seed=args.seed)
        except DegenerateDataError:
            # No spread to model (e.g. identical member maps): everything null.
            fit = None
        if fit is None:
            labels = np.zeros(t_map.shape[0], dtype=np.int8)
        else:
            labels = mixture.classify_voxels(fit, t_map)
            labels[degenerate] = mixture.LABEL_NULL
        prefix = os.path.join(out, f"comp{rank:02d}")
        io.write_matrix(t_map[None, :], prefix + "_tstat.rnm")
        io.write_matrix(labels[None, :].astype(np.float64), prefix + "_labels.rnm")
        lines = [
            "# tail-mixture fit parameters",
            f"rank = {rank}",
            f"degenerate_locations = {int(degenerate.sum())}",
        ]
        if fit is not None:
            io.write_matrix(mixture.histogram_data(fit, t_map, bins=args.bins), prefix + "_hist.rnm")
            lines += [
                f"weights = {fit.weights[0]!r} {fit.weights[1]!r} {fit.weights[2]!r}",
                f"t = {fit.t_params[0]!r} {fit.t_params[1]!r} {fit.t_params[2]!r}",
                f"gamma_pos = {fit.gamma_pos[0]!r} {fit.gamma_pos[1]!r} {fit.gamma_pos[2]!r}",
                f"gamma_neg = {fit.gamma_neg[0]!r} {fit.gamma_neg[1]!r} {fit.gamma_neg[2]!r}",
                f"converged = {'true' if fit.converged else 'false'}",
            ]
        else:
            lines.append("degenerate = true")
        io.write_text(prefix + "_fit.txt", lines)
        n_done += 1
    print(f"fitted {n_done} significant component(s) to {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
