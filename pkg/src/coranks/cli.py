"""Command-line interface.

Subcommands: ``ranks``, ``stat``, ``contours``, ``simulate``, ``verify``,
``grid`` and ``sample``. Exit codes: 0 success (all gates pass), 1 gate
failure, 2 usage or input/output error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .codf import RankSigns, empirical_codf, ranks_and_signs
from .grid import factorize, make_grid
from .io import (ArtifactError, artifact_meta, check_writable, columns, model_from_config,
                 parse_vector, rank_sign_rows, read_csv, read_json, reference_from_config,
                 write_csv, write_json)
from .limit import extract_bridge, loglik_drift
from .models import ModelSpec, information_structure, residuals
from .scores import score_from_name, tangent_from_name
from .statistics import (approximate_score_statistic, exact_score_statistic_mc,
                         partial_sum_statistic)
from .verification import (ALPHA, check_basu_independence, check_bridge_law,
                           check_distribution_freeness, check_efficiency,
                           check_glivenko_cantelli, check_joint_weak_convergence,
                           check_limit_experiment, null_drift_paths, two_sample_constants)

EXIT_OK, EXIT_GATE, EXIT_USAGE = 0, 1, 2
CHECKS = ("dfree", "basu", "gc", "bridge", "convergence", "efficiency", "limit")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# shared helpers


def _load_model(args, d: int) -> ModelSpec:
    if args.config:
        cfg = read_json(args.config)
        model = model_from_config({"d": d, **cfg}, Path(args.config).parent)
        if model.d != d:
            raise UsageError(f"config field 'd': {model.d} does not match the {d} input columns")
        return model
    if args.model == "linear_regression":
        raise UsageError("--model linear_regression needs --config with a 'covariates' field")
    return model_from_config({"d": d})


def _input_points(args):
    if not args.input:
        raise UsageError("--input is required")
    meta, header, values = read_csv(args.input)
    d = values.shape[1]
    model = _load_model(args, d)
    theta = parse_vector(args.theta, "--theta", model.k) if args.theta else np.zeros(model.k)
    try:
        z = residuals(model, values, theta)
    except ValueError as exc:
        raise UsageError(f"--theta/covariates: {exc}") from exc
    return z, model, theta


def _grid_for(n, d, args):
    try:
        return make_grid(factorize(n, d, args.nr, args.ns, seed=args.seed))
    except ValueError as exc:
        raise UsageError(f"--nr/--ns: {exc}") from exc


def _require_output(args):
    if not args.output:
        raise UsageError("--output is required")
    return args.output


# ---------------------------------------------------------------------------
# subcommands


def cmd_ranks(args) -> int:
    out = _require_output(args)
    z, model, theta = _input_points(args)
    grid = _grid_for(len(z), z.shape[1], args)
    rs = ranks_and_signs(empirical_codf(z, grid), tie_seed=args.seed)
    header, rows = rank_sign_rows(rs)
    config = {"input": str(args.input), "model": model.kind, "f0": model.f0.to_dict(),
              "theta": theta, "grid": grid.to_dict()}
    write_csv(out, header, rows, artifact_meta("ranks", config, args.seed), args.force)
    return EXIT_OK


def _constants(spec, n):
    if spec in (None, "index"):
        return np.arange(1, n + 1, dtype=float)
    if spec == "two-sample":
        return two_sample_constants(n)
    _, _, values = read_csv(spec, what="constants")
    if values.shape[1] != 1 or len(values) != n:
        raise UsageError(f"--constants: expected one column with {n} rows, got shape {values.shape}")
    return values[:, 0]


def cmd_stat(args) -> int:
    out = _require_output(args)
    if not args.input:
        raise UsageError("--input is required")
    meta, header, values = read_csv(args.input)
    images = columns(header, values, "image", what=f"input {args.input!r}")
    n_R = args.nr
    grid_meta = None
    if meta is not None:
        grid_meta = meta.get("config", {}).get("grid")
        if n_R is None and grid_meta is not None:
            n_R = grid_meta.get("n_R")
    if n_R is None:
        raise UsageError("n_R unknown: input has no grid metadata; pass --nr")
    rs = RankSigns.from_images(images, int(n_R), tie_seed=args.seed, grid_meta=grid_meta)
    n, d = len(rs), rs.d
    reference = reference_from_config({"name": args.reference, "d": d}, "--reference")
    score = score_from_name(args.score or "wilcoxon", d, reference)
    if args.statistic == "partial":
        if args.u is None:
            raise UsageError("--u is required for the partial statistic")
        value = partial_sum_statistic(score, rs, args.u)
    else:
        c = _constants(args.constants, n)
        if args.statistic == "approximate":
            value = approximate_score_statistic(c, score, rs)
        else:
            value = exact_score_statistic_mc(c, score, rs, reference, args.reps or 100, args.seed)
    config = {"input": str(args.input), "statistic": args.statistic, "score": score.label,
              "constants": args.constants or "index", "u": args.u, "reference": reference.to_dict(),
              "replicates": args.reps if args.statistic == "exact" else None}
    record = value.to_record(grid_meta, args.seed)
    write_json(out, {**artifact_meta("stat", config, args.seed), "statistic": record}, args.force)
    return EXIT_OK


def cmd_contours(args) -> int:
    out = _require_output(args)
    z, model, theta = _input_points(args)
    if z.shape[1] != 2:
        raise UsageError(f"contours need d = 2, input has {z.shape[1]} columns")
    grid = _grid_for(len(z), 2, args)
    rs = ranks_and_signs(empirical_codf(z, grid), tie_seed=args.seed)
    n_R = grid.spec.n_R
    orders = [int(x) for x in parse_vector(args.orders, "--orders")] if args.orders \
        else list(range(1, n_R + 1))
    bad = [j for j in orders if not 1 <= j <= n_R]
    if bad:
        raise UsageError(f"--orders: {bad} outside 1..{n_R}")
    rows = []
    levels = {}
    for j in orders:
        idx = np.flatnonzero(rs.rank == j)
        angle = np.arctan2(rs.sign[idx, 1], rs.sign[idx, 0])
        order = np.argsort(angle, kind="stable")
        levels[str(j)] = {"level": j / (n_R + 1), "points": int(len(idx))}
        for pos, k in enumerate(idx[order]):
            rows.append([j, j / (n_R + 1), pos, angle[order][pos], int(k), *z[k]])
    header = ["order", "level", "position", "angle", "observation", "z_1", "z_2"]
    config = {"input": str(args.input), "model": model.kind, "theta": theta,
              "grid": grid.to_dict(), "orders": orders, "contours": levels}
    write_csv(out, header, rows, artifact_meta("contours", config, args.seed), args.force)
    return EXIT_OK


def _tangents(cfg, f0, seed):
    names = cfg.get("tangents", [])
    if not isinstance(names, list) or not names:
        raise ArtifactError("config field 'tangents' must be a non-empty list of names")
    out = []
    for i, name in enumerate(names):
        try:
            out.append(tangent_from_name(name, f0, cfg.get("centering_draws", 10**6), seed))
        except ValueError as exc:
            raise ArtifactError(f"config field 'tangents[{i}]': {exc}") from exc
    return out


def _local_list(cfg, k, labels):
    out = []
    for i, item in enumerate(cfg.get("local", [])):
        where = f"local[{i}]"
        tau = parse_vector(item.get("tau", [0.0] * k), f"config field '{where}.tau'", k)
        eta = item.get("eta")
        if eta is not None and eta not in labels:
            raise ArtifactError(f"config field '{where}.eta': {eta!r} not in tangents {list(labels)}")
        out.append((tau, None if eta is None else labels.index(eta)))
    if not out:
        raise ArtifactError("config field 'local' must list at least one {tau, eta}")
    return out


def _limit_setup(args):
    if not args.config:
        raise UsageError("--config is required")
    cfg = read_json(args.config)
    seed = cfg.get("seed", 0) if args.seed is None else args.seed
    model = model_from_config(cfg.get("model", {}), Path(args.config).parent)
    tangents = _tangents(cfg, model.f0, seed)
    info = information_structure(model, tangents, cfg.get("info_draws", 10**6), seed)
    local = _local_list(cfg, model.k, list(info.labels))
    return cfg, seed, model, tangents, info, local


def cmd_simulate(args) -> int:
    out = Path(_require_output(args))
    summary_path = out.with_suffix(".summary.json")
    cfg, seed, model, tangents, info, local = _limit_setup(args)
    n_paths = args.reps or cfg.get("paths", 10**4)
    time_grid = cfg.get("time_grid")
    alpha = args.alpha if args.alpha is not None else cfg.get("alpha", ALPHA)
    paths = null_drift_paths(info, n_paths, seed, time_grid)
    tg = paths.time_grid
    m = info.k + info.ell
    llr = np.column_stack([loglik_drift(paths, tau, j) for tau, j in local])
    bridges = [extract_bridge(paths, e).values for e in range(info.ell)]
    header = ["path", *[f"endpoint_{i + 1}" for i in range(m)],
              *[f"loglik_{a + 1}" for a in range(len(local))],
              *[f"bridge_{e + 1}_u{u!r}" for e in range(info.ell) for u in tg]]
    rows = ([p, *paths.endpoint[p], *llr[p], *np.concatenate([b[p] for b in bridges])]
            for p in range(n_paths))
    config = {**cfg, "seed": seed, "paths": n_paths, "time_grid": tg, "alpha": alpha,
              "information": info.to_dict()}
    meta = artifact_meta("simulate", config, seed)
    check_writable(summary_path, args.force)
    write_csv(out, header, rows, meta, args.force)
    report = check_limit_experiment(info, local, n_paths, seed, time_grid, alpha)
    summary = {**meta, "endpoint_mean": paths.endpoint.mean(axis=0),
               "endpoint_cov": np.cov(paths.endpoint, rowvar=False),
               "loglik_mean": llr.mean(axis=0), "exp_loglik_mean": np.exp(llr).mean(axis=0),
               "report": report.to_dict()}
    write_json(summary_path, summary, args.force)
    return _gate_exit(report, args)


def check_from_config(name: str, cfg: dict, base_dir=".", seed=None, reps=None, alpha=None,
                      nr=None, ns=None, score=None, jobs=1):
    """Run the check ``name`` (one of :data:`CHECKS`) described by a config
    dict; keyword overrides take precedence over config values."""
    if name not in CHECKS:
        raise UsageError(f"unknown check {name!r}; choose from {CHECKS}")
    base_dir = Path(base_dir)

    def pick(key, value, default=None):
        return cfg.get(key, default) if value is None else value

    seed = pick("seed", seed, 0)
    alpha = pick("alpha", alpha, ALPHA)
    reps = pick("replicates", reps)
    grid_kw = {"nr": pick("nr", nr), "ns": pick("ns", ns), "grid_seed": cfg.get("grid_seed", 0)}
    if name == "dfree":
        refs = [reference_from_config(r, f"densities[{i}]")
                for i, r in enumerate(cfg.get("densities", []))]
        if len(refs) < 2:
            raise ArtifactError("config field 'densities' needs at least 2 entries")
        return check_distribution_freeness(refs, cfg.get("n", 60), reps or 20000, seed,
                                           score=pick("score", score, "wilcoxon"),
                                           constants=cfg.get("constants"), alpha=alpha,
                                           n_jobs=jobs, **grid_kw)
    if name == "basu":
        ref = reference_from_config(cfg.get("density", "gaussian"), "density")
        return check_basu_independence(ref, cfg.get("n", 60), reps or 20000, seed,
                                       alpha=alpha, n_jobs=jobs, **grid_kw)
    if name == "gc":
        ref = reference_from_config(cfg.get("density", "gaussian"), "density")
        return check_glivenko_cantelli(ref, tuple(cfg.get("n_list", (400, 1600, 3600))),
                                       reps or 50, seed, cfg.get("ratio", 1.4),
                                       cfg.get("grid_seed", 0), jobs)
    if name == "bridge":
        ref = reference_from_config(cfg.get("density", "gaussian"), "density")
        eta = tangent_from_name(cfg.get("tangent", "tanh:1"), ref)
        return check_bridge_law(ref, eta, cfg.get("n", 2000), reps or 5000, seed,
                                tuple(cfg.get("u", (0.25, 0.5, 0.75))),
                                rel_tol=cfg.get("rel_tol", 0.05), n_jobs=jobs, **grid_kw)
    if name == "efficiency":
        model = model_from_config(cfg.get("model", {}), base_dir)
        alt = cfg.get("alternative")
        alt = None if alt is None else reference_from_config(alt, "alternative")
        return check_efficiency(model, pick("score", score, "gaussian"),
                                cfg.get("n", 2000), reps or 500, seed, alt, alpha=alpha,
                                n_jobs=jobs, **grid_kw)
    model = model_from_config(cfg.get("model", {}), base_dir)
    tangents = _tangents(cfg, model.f0, seed)
    info = information_structure(model, tangents, cfg.get("info_draws", 10**6), seed)
    local = _local_list(cfg, model.k, list(info.labels))
    if name == "convergence":
        return check_joint_weak_convergence(
            model, tangents, local, tuple(cfg.get("u", (0.25, 0.5))), cfg.get("n", 2000),
            reps or 5000, seed, info=info, alpha=alpha, limit_paths=cfg.get("limit_paths"),
            n_jobs=jobs, **grid_kw)
    if name == "limit":
        return check_limit_experiment(info, local, reps or 10**4, seed, cfg.get("time_grid"), alpha)
    raise AssertionError(name)


def _gate_exit(report, args) -> int:
    for line in report.lines():
        print(line)
    if report.passed:
        return EXIT_OK
    if args.diagnostic:
        print(f"warning: {report.name} failed; --diagnostic downgrades this to a warning",
              file=sys.stderr)
        return EXIT_OK
    return EXIT_GATE


def cmd_verify(args) -> int:
    out = _require_output(args)
    cfg = read_json(args.config) if args.config else {}
    base_dir = Path(args.config).parent if args.config else Path(".")
    check_writable(out, args.force)
    report = check_from_config(args.check, cfg, base_dir, seed=args.seed, reps=args.reps,
                               alpha=args.alpha, nr=args.nr, ns=args.ns, score=args.score,
                               jobs=args.jobs)
    body = {**artifact_meta(f"verify {args.check}", cfg, report.seed),
            "diagnostic": bool(args.diagnostic), "report": report.to_dict()}
    write_json(out, body, args.force)
    return _gate_exit(report, args)


def cmd_grid(args) -> int:
    out = _require_output(args)
    if args.n is None:
        raise UsageError("--n is required")
    grid = _grid_for(args.n, args.d, args)
    body = {**artifact_meta("grid", {"n": args.n, "d": args.d, "nr": args.nr, "ns": args.ns},
                            args.seed),
            "grid": grid.to_dict(), "radii": grid.radii, "points": grid.points}
    write_json(out, body, args.force)
    return EXIT_OK


def cmd_sample(args) -> int:
    out = _require_output(args)
    if args.n is None:
        raise UsageError("--n is required")
    ref = reference_from_config({"name": args.density, "d": args.d}, "--density")
    z = ref.sample(np.random.default_rng(args.seed), args.n)
    header = [f"x_{j + 1}" for j in range(args.d)]
    config = {"density": ref.to_dict(), "n": args.n}
    write_csv(out, header, z, artifact_meta("sample", config, args.seed), args.force)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coranks", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"coranks {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed_default=0):
        sp.add_argument("--output", "-o", help="artifact path")
        sp.add_argument("--force", action="store_true", help="overwrite existing outputs")
        sp.add_argument("--seed", type=int, default=seed_default, help="master seed")

    def gridflags(sp):
        sp.add_argument("--nr", type=int, help="number of radii n_R")
        sp.add_argument("--ns", type=int, help="number of directions n_S")

    def dataflags(sp):
        sp.add_argument("--input", "-i", help="headered CSV of observations")
        sp.add_argument("--config", help="model config JSON")
        sp.add_argument("--model", choices=("location", "linear_regression"), default="location")
        sp.add_argument("--theta", help="comma-separated parameter value (default 0)")

    sp = sub.add_parser("ranks", help="center-outward ranks and signs of residuals")
    common(sp); gridflags(sp); dataflags(sp)
    sp.set_defaults(func=cmd_ranks)

    sp = sub.add_parser("stat", help="rank statistic from a ranks CSV")
    common(sp); gridflags(sp)
    sp.add_argument("--input", "-i", help="CSV written by `ranks`")
    sp.add_argument("--score", default="wilcoxon", help="wilcoxon, sign, gaussian or tangent:<name>")
    sp.add_argument("--statistic", choices=("approximate", "exact", "partial"), default="approximate")
    sp.add_argument("--constants", help="index (default), two-sample, or a one-column CSV")
    sp.add_argument("--u", type=float, help="split point for the partial statistic")
    sp.add_argument("--reference", default="gaussian", help="reference density name")
    sp.add_argument("--reps", type=int, help="Monte Carlo replicates for exact scores")
    sp.set_defaults(func=cmd_stat)

    sp = sub.add_parser("contours", help="same-rank polylines ordered by sign angle (d = 2)")
    common(sp); gridflags(sp); dataflags(sp)
    sp.add_argument("--orders", help="comma-separated rank orders j (default all)")
    sp.set_defaults(func=cmd_contours)

    sp = sub.add_parser("simulate", help="paths of the limiting drift experiment")
    common(sp, seed_default=None)
    sp.add_argument("--config", help="simulation config JSON")
    sp.add_argument("--reps", type=int, help="number of paths")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--diagnostic", action="store_true", help="report gate failures as warnings")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="run a Monte Carlo check and write a JSON report")
    common(sp, seed_default=None); gridflags(sp)
    sp.add_argument("check", choices=CHECKS)
    sp.add_argument("--config", help="check config JSON")
    sp.add_argument("--reps", type=int, help="replicates")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--score")
    sp.add_argument("--jobs", type=int, default=1, help="parallel workers")
    sp.add_argument("--diagnostic", action="store_true", help="report gate failures as warnings")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("grid", help="dump the spherical grid as JSON")
    common(sp); gridflags(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--d", type=int, default=2)
    sp.set_defaults(func=cmd_grid)

    sp = sub.add_parser("sample", help="draw i.i.d. observations from a reference density")
    common(sp)
    sp.add_argument("--density", default="gaussian", help="gaussian, t, uniform or mixture")
    sp.add_argument("--n", type=int)
    sp.add_argument("--d", type=int, default=2)
    sp.set_defaults(func=cmd_sample)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ArtifactError, ValueError, TypeError) as exc:
        print(f"coranks {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
