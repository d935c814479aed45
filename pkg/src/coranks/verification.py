"""Monte Carlo checks producing pass/fail reports.

Every replicate draws from its own generator seeded with
``(seed, stream, index)``; results therefore do not depend on the order or
process in which replicates run. The optimal pairings of a replicate are
memoized in-process, so checks sharing a reference density, grid and seed
(e.g. the n = 2000 bridge, convergence and efficiency checks) solve each
assignment once.
"""
from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .codf import codf_closed_form_spherical, solve_assignment
from .densities import ReferenceDensity, SphericalT
from .grid import Grid, factorize, make_grid
from .limit import (DriftConfig, extract_bridge, loglik_drift, loglik_shift,
                    sample_drift_path)
from .models import (InformationStructure, LocalParam, ModelSpec, data_from_residuals,
                     information_structure, log_likelihood_ratio_finite_n)
from .scores import ball_score_from_tangent, score_from_name, spherical_quantile_map
from .statistics import (centered_constants, centered_partial_sum,
                         finite_population_covariance, finite_population_variance,
                         split_index)

ALPHA = 0.001
SE_MULT = 3.0

_OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


@dataclass
class Gate:
    name: str
    value: float
    op: str
    threshold: float

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.value)) and _OPS[self.op](self.value, self.threshold)

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "op": self.op,
                "threshold": self.threshold, "ok": self.ok}


@dataclass
class CheckReport:
    name: str
    replicates: int
    seed: int
    alpha: float
    statistics: dict = field(default_factory=dict)
    p_values: dict = field(default_factory=dict)
    gates: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    runtime_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.gates) and all(g.ok for g in self.gates)

    def gate(self, name, value, op, threshold):
        self.gates.append(Gate(name, float(value), op, float(threshold)))

    def to_dict(self, include_runtime=True) -> dict:
        out = {
            "name": self.name,
            "pass": self.passed,
            "replicates": self.replicates,
            "seed": self.seed,
            "alpha": self.alpha,
            "config": self.config,
            "statistics": self.statistics,
            "p_values": self.p_values,
            "gates": [g.to_dict() for g in self.gates],
            "notes": self.notes,
        }
        if include_runtime:
            out["runtime_seconds"] = self.runtime_seconds
        return out

    def lines(self) -> list[str]:
        head = f"[{'PASS' if self.passed else 'FAIL'}] {self.name} ({self.runtime_seconds:.1f}s)"
        body = [f"    {'ok  ' if g.ok else 'FAIL'} {g.name}: {g.value:.6g} {g.op} {g.threshold:.6g}"
                for g in self.gates]
        return [head, *body]


# ---------------------------------------------------------------------------
# replicate engine


def derive_seed(seed, *keys) -> int:
    """A 64-bit integer seed derived from ``(seed, *keys)``."""
    ss = np.random.SeedSequence([int(seed), *map(int, keys)])
    return int(ss.generate_state(1, np.uint64)[0])


def replicate_rng(seed, stream, index) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(stream), int(index)])


_PAIRINGS: dict = {}
_PAIRING_BUDGET = 60_000_000  # stored grid indices


def clear_pairing_cache():
    _PAIRINGS.clear()


def _reference_key(reference: ReferenceDensity) -> str:
    return json.dumps(reference.to_dict(), sort_keys=True)


def replicate_pairing(reference: ReferenceDensity, grid: Grid, seed, stream, index):
    """Residual sample of replicate ``index`` and its optimal grid pairing."""
    z = reference.sample(replicate_rng(seed, stream, index), grid.n)
    key = (_reference_key(reference), grid.spec, int(seed), int(stream), int(index))
    perm = _PAIRINGS.get(key)
    if perm is None:
        perm = solve_assignment(z, grid).permutation.astype(np.int32)
        if sum(len(p) for p in _PAIRINGS.values()) + len(perm) > _PAIRING_BUDGET:
            _PAIRINGS.clear()
        _PAIRINGS[key] = perm
    return z, perm


def run_replicates(fn, count: int, n_jobs: int = 1) -> list:
    if n_jobs == 1:
        return [fn(i) for i in range(count)]
    from joblib import Parallel, delayed
    return Parallel(n_jobs=n_jobs)(delayed(fn)(i) for i in range(count))


def _grid(n, d, nr, ns, grid_seed) -> Grid:
    return make_grid(factorize(n, d, nr, ns, seed=grid_seed))


def _corr(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        return 0.0
    return float(np.corrcoef(a, b)[0, 1])


def _ks(a, b) -> float:
    return float(stats.ks_2samp(a, b).pvalue)


def _finish(report: CheckReport, t0: float) -> CheckReport:
    report.runtime_seconds = time.perf_counter() - t0
    return report


# ---------------------------------------------------------------------------
# checks


def check_distribution_freeness(references, n=60, replicates=20000, seed=0, nr=None, ns=None,
                                score="wilcoxon", constants=None, alpha=ALPHA, grid_seed=0,
                                n_jobs=1) -> CheckReport:
    """Law of the first rank and of an approximate-score statistic across
    generating densities, with the residual mean as a negative control."""
    t0 = time.perf_counter()
    references = list(references)
    if len(references) < 2:
        raise ValueError("need at least 2 generating densities")
    d = references[0].d
    if any(r.d != d for r in references):
        raise ValueError("all densities must share the dimension")
    grid = _grid(n, d, nr, ns, grid_seed)
    spec = grid.spec
    J = score_from_name(score, d)
    Jg = J(grid.points)
    c = np.arange(1, n + 1, dtype=float) if constants is None else constants
    cc, norm = centered_constants(c, n)

    report = CheckReport("distribution_freeness", replicates, seed, alpha,
                         config={"n": n, "grid": spec.to_dict(), "score": score,
                                 "densities": [r.to_dict() for r in references],
                                 "constants": "1..n" if constants is None else "user"})
    samples = []
    for idx, ref in enumerate(references):
        def one(r, ref=ref, idx=idx):
            z, perm = replicate_pairing(ref, grid, seed, idx, r)
            img0 = grid.points[perm[0]]
            rank1 = int(np.rint((spec.n_R + 1) * np.linalg.norm(img0)))
            return rank1, cc @ Jg[perm] / norm, z[:, 0].mean()
        out = run_replicates(one, replicates, n_jobs)
        rank1 = np.array([o[0] for o in out])
        ta = np.array([o[1] for o in out])
        neg = np.array([o[2] for o in out])
        samples.append((rank1, ta, neg))

        counts = np.bincount(rank1, minlength=spec.n_R + 1)
        probs = np.full(spec.n_R + 1, spec.n_S / n)
        probs[0] = spec.n_0 / n
        if spec.n_0 == 0:
            counts, probs = counts[1:], probs[1:]
        p = float(stats.chisquare(counts, probs * replicates).pvalue)
        key = f"rank1_uniform[{ref.name}#{idx}]"
        report.p_values[key] = p
        report.gate(key, p, ">", alpha)

    neg_ps = []
    for (i, a), (j, b) in itertools.combinations(enumerate(samples), 2):
        pair = f"{references[i].name}#{i}~{references[j].name}#{j}"
        for comp in range(a[1].shape[1]):
            key = f"T_a[{comp + 1}] {pair}"
            p = _ks(a[1][:, comp], b[1][:, comp])
            report.p_values[key] = p
            report.gate(key, p, ">", alpha)
        p = _ks(a[2], b[2])
        report.p_values[f"negative_control {pair}"] = p
        neg_ps.append(p)
    report.gate("negative_control residual mean (min KS p, must reject)", min(neg_ps), "<", alpha)
    return _finish(report, t0)


def check_basu_independence(reference: ReferenceDensity, n=60, replicates=20000, seed=0,
                            nr=None, ns=None, alpha=ALPHA, grid_seed=0, n_jobs=1) -> CheckReport:
    """Independence of ``(R_1, S_1)`` from the sum of squared residual norms."""
    t0 = time.perf_counter()
    grid = _grid(n, reference.d, nr, ns, grid_seed)
    spec = grid.spec

    def one(r):
        z, perm = replicate_pairing(reference, grid, seed, 0, r)
        img0 = grid.points[perm[0]]
        norm0 = np.linalg.norm(img0)
        if norm0 > 0:
            sign0 = img0 / norm0
        else:
            g = replicate_rng(seed, 1, r).standard_normal(reference.d)
            sign0 = g / np.linalg.norm(g)
        return np.rint((spec.n_R + 1) * norm0), sign0, float(np.sum(z * z))

    out = run_replicates(one, replicates, n_jobs)
    rank1 = np.array([o[0] for o in out])
    sign1 = np.array([o[1] for o in out])
    v = np.array([o[2] for o in out])
    thr = SE_MULT / math.sqrt(replicates)
    report = CheckReport("basu_independence", replicates, seed, alpha,
                         config={"n": n, "grid": spec.to_dict(), "density": reference.to_dict(),
                                 "corr_threshold": thr})
    v_high = v > np.median(v)
    columns = {"R_1": (rank1, rank1 > np.median(rank1))}
    for j in range(reference.d):
        columns[f"S_1[{j + 1}]"] = (sign1[:, j], sign1[:, j] > 0)
    for name, (x, high) in columns.items():
        r = _corr(x, v)
        report.statistics[f"corr({name}, sum|Z|^2)"] = r
        report.gate(f"|corr({name}, sum|Z|^2)|", abs(r), "<", thr)
        table = np.array([[np.sum(high & v_high), np.sum(high & ~v_high)],
                          [np.sum(~high & v_high), np.sum(~high & ~v_high)]])
        p = float(stats.chi2_contingency(table, correction=False).pvalue)
        report.p_values[f"median_split {name}"] = p
        report.gate(f"median_split chi2 {name}", p, ">", alpha)
    self_corr = _corr(v, v)
    report.statistics["negative_control corr(sum|Z|^2, itself)"] = self_corr
    report.gate("negative_control self-correlation (must be detected)", abs(self_corr), ">", thr)
    return _finish(report, t0)


def check_glivenko_cantelli(reference: ReferenceDensity, n_list=(400, 1600, 3600),
                            replicates=50, seed=0, ratio=1.4, grid_seed=0, n_jobs=1) -> CheckReport:
    """Median over replicates of ``max_i |F_n(Z_i) - F(Z_i)|`` along ``n_list``."""
    t0 = time.perf_counter()
    if not reference.spherical:
        raise ValueError(f"{reference.name} is not spherical: no closed-form oracle")
    report = CheckReport("glivenko_cantelli", replicates, seed, ALPHA,
                         config={"n_list": list(n_list), "density": reference.to_dict(),
                                 "ratio": ratio})
    medians = []
    for n in n_list:
        try:
            grid = make_grid(factorize(n, reference.d, seed=grid_seed))
        except ValueError as exc:
            report.notes.append(f"n={n} skipped: {exc}")
            continue

        def one(r, grid=grid, n=n):
            z, perm = replicate_pairing(reference, grid, seed, n, r)
            err = grid.points[perm] - codf_closed_form_spherical(reference.radial_cdf, z)
            return float(np.max(np.linalg.norm(err, axis=1)))

        med = float(np.median(run_replicates(one, replicates, n_jobs)))
        report.statistics[f"median_max_error[n={n}]"] = med
        medians.append(med)
    if len(medians) >= 2:
        drops = np.diff(medians)
        report.gate("medians strictly decreasing (largest successive change)",
                    float(drops.max()), "<", 0.0)
        report.statistics["ratio_first_last"] = medians[0] / medians[-1]
        report.gate("median ratio first/last", medians[0] / medians[-1], ">=", ratio)
    else:
        report.gate("at least two usable sample sizes", len(medians), ">=", 2)
    return _finish(report, t0)


def _tangent_grid_scores(tangents, reference: ReferenceDensity, grid: Grid) -> np.ndarray:
    qmap = spherical_quantile_map(reference)
    return np.column_stack([ball_score_from_tangent(eta, qmap)(grid.points)[:, 0]
                            for eta in tangents])


def check_bridge_law(reference: ReferenceDensity, tangent, n=2000, replicates=5000, seed=0,
                     u_list=(0.25, 0.5, 0.75), nr=None, ns=None, rel_tol=0.05,
                     grid_seed=0, n_jobs=1) -> CheckReport:
    """Variance and covariance of the grid-centered partial sums against the
    bridge law ``(min(u, v) - u v) * sigma_b^2`` and its exact finite-population
    version."""
    t0 = time.perf_counter()
    grid = _grid(n, reference.d, nr, ns, grid_seed)
    b_grid = _tangent_grid_scores([tangent], reference, grid)[:, 0]
    ms = [split_index(u, n) for u in u_list]

    def one(r):
        _, perm = replicate_pairing(reference, grid, seed, 0, r)
        b = b_grid[perm]
        return [centered_partial_sum(b, m) / math.sqrt(n) for m in ms]

    t = np.array(run_replicates(one, replicates, n_jobs))
    sigma2 = float(np.mean((b_grid - b_grid.mean()) ** 2))
    report = CheckReport("bridge_law", replicates, seed, ALPHA,
                         config={"n": n, "grid": grid.spec.to_dict(), "density": reference.to_dict(),
                                 "tangent": tangent.label, "u": list(u_list), "rel_tol": rel_tol})
    report.statistics["sigma_b^2"] = sigma2
    for i, u in enumerate(u_list):
        var = float(np.var(t[:, i], ddof=1))
        bridge = u * (1 - u) * sigma2
        exact = finite_population_variance(b_grid, u)
        report.statistics[f"var[u={u}]"] = var
        report.statistics[f"bridge_var[u={u}]"] = bridge
        report.statistics[f"finite_population_var[u={u}]"] = exact
        report.gate(f"|var/bridge - 1| u={u}", abs(var / bridge - 1), "<=", rel_tol)
        report.gate(f"|var/finite_population - 1| u={u}", abs(var / exact - 1), "<=", rel_tol)
    for i, j in itertools.combinations(range(len(u_list)), 2):
        ua, ub = u_list[i], u_list[j]
        x = t[:, i] - t[:, i].mean()
        y = t[:, j] - t[:, j].mean()
        prod = x * y
        cov = float(prod.sum() / (replicates - 1))
        se = float(prod.std(ddof=1) / math.sqrt(replicates))
        bridge = (min(ua, ub) - ua * ub) * sigma2
        exact = finite_population_covariance(b_grid, ua, ub)
        report.statistics[f"cov[{ua},{ub}]"] = cov
        report.statistics[f"cov_se[{ua},{ub}]"] = se
        report.gate(f"|cov - bridge|/se [{ua},{ub}]", abs(cov - bridge) / se, "<=", SE_MULT)
        report.gate(f"|cov - finite_population|/se [{ua},{ub}]", abs(cov - exact) / se, "<=", SE_MULT)
    return _finish(report, t0)


def check_joint_weak_convergence(model: ModelSpec, tangents, local_list, u_list=(0.25, 0.5),
                                 n=2000, replicates=5000, seed=0, info: InformationStructure = None,
                                 theta0=None, nr=None, ns=None, alpha=ALPHA, limit_paths=None,
                                 info_draws=10**6, grid_seed=0, n_jobs=1) -> CheckReport:
    """Finite-n (log-likelihood ratios, partial sums) against the limiting
    (Girsanov log-likelihood ratios, Brownian bridges), both under (0, 0).

    ``local_list`` holds ``(tau, eta_index)`` pairs, ``eta_index`` pointing
    into ``tangents`` or ``None``.
    """
    t0 = time.perf_counter()
    tangents = list(tangents)
    labels = tuple(eta.label for eta in tangents)
    if info is None:
        info = information_structure(model, tangents, draws=info_draws, seed=derive_seed(seed, 11))
    if info.labels != labels or info.k != model.k:
        raise ValueError(f"information structure {info.labels} (k={info.k}) does not match "
                         f"tangents {labels} (k={model.k})")
    theta0 = np.zeros(model.k) if theta0 is None else np.asarray(theta0, dtype=float)
    f0 = model.f0
    grid = _grid(n, model.d, nr, ns, grid_seed)
    b_grid = _tangent_grid_scores(tangents, f0, grid)
    ms = [split_index(u, n) for u in u_list]
    locals_ = [LocalParam(theta0, tau, None if j is None else tangents[j], n)
               for tau, j in local_list]

    def one(r):
        z, perm = replicate_pairing(f0, grid, seed, 0, r)
        x = data_from_residuals(model, z, theta0)
        llr = [log_likelihood_ratio_finite_n(model, x, lp) for lp in locals_]
        b = b_grid[perm]
        part = [centered_partial_sum(b, m) / math.sqrt(n) for m in ms]  # each (l,)
        return llr, np.array(part).T  # (l, len(u))

    out = run_replicates(one, replicates, n_jobs)
    llr_n = np.array([o[0] for o in out])
    part_n = np.array([o[1] for o in out])

    npaths = replicates if limit_paths is None else limit_paths
    time_grid = np.array(sorted({0.0, 1.0, *map(float, u_list)}))
    cfg = DriftConfig(info, time_grid=time_grid, seed=derive_seed(seed, 12))
    paths = sample_drift_path(cfg, npaths)
    llr_lim = np.column_stack([loglik_drift(paths, tau, j) for tau, j in local_list])
    cols = [int(np.flatnonzero(np.isclose(time_grid, u))[0]) for u in u_list]
    bridge = np.stack([extract_bridge(paths, j).values[:, cols] for j in range(len(tangents))],
                      axis=1)

    thr_n = SE_MULT / math.sqrt(replicates)
    thr_l = SE_MULT / math.sqrt(npaths)
    report = CheckReport("joint_weak_convergence", replicates, seed, alpha,
                         config={"n": n, "grid": grid.spec.to_dict(), "model": model.kind,
                                 "density": f0.to_dict(), "tangents": list(labels),
                                 "local": [[np.asarray(t, float).tolist(), j] for t, j in local_list],
                                 "u": list(u_list), "limit_paths": npaths,
                                 "information": info.to_dict()})
    for a, (tau, j) in enumerate(local_list):
        name = f"LLR[tau={np.asarray(tau, float).tolist()}, eta={'0' if j is None else labels[j]}]"
        if np.ptp(llr_n[:, a]) == 0 and np.ptp(llr_lim[:, a]) == 0:
            report.notes.append(f"{name} is identically {llr_n[0, a]} in both samples")
            report.gate(f"{name} identical constants", abs(llr_n[0, a] - llr_lim[0, a]), "<=", 0.0)
            continue
        report.statistics[f"mean {name} finite"] = float(llr_n[:, a].mean())
        report.statistics[f"mean {name} limit"] = float(llr_lim[:, a].mean())
        p = _ks(llr_n[:, a], llr_lim[:, a])
        report.p_values[f"KS {name}"] = p
        report.gate(f"KS {name}", p, ">", alpha)
        for i, lab in enumerate(labels):
            for c, u in enumerate(u_list):
                rn = _corr(llr_n[:, a], part_n[:, i, c])
                rl = _corr(llr_lim[:, a], bridge[:, i, c])
                report.statistics[f"corr({name}, T[{lab};{u}]) finite"] = rn
                report.statistics[f"corr({name}, B[{lab};{u}]) limit"] = rl
                report.gate(f"|corr| finite {name} x T[{lab};{u}]", abs(rn), "<", thr_n)
                report.gate(f"|corr| limit {name} x B[{lab};{u}]", abs(rl), "<", thr_l)
    for i, lab in enumerate(labels):
        for c, u in enumerate(u_list):
            p = _ks(part_n[:, i, c], bridge[:, i, c])
            report.statistics[f"var T[{lab};{u}]"] = float(part_n[:, i, c].var(ddof=1))
            report.statistics[f"var B[{lab};{u}]"] = float(bridge[:, i, c].var(ddof=1))
            report.p_values[f"KS T[{lab};{u}] vs B"] = p
            report.gate(f"KS T[{lab};{u}] vs B", p, ">", alpha)
    return _finish(report, t0)


def two_sample_constants(n: int) -> np.ndarray:
    """-1 for the first half, +1 for the second."""
    return np.concatenate([-np.ones(n // 2), np.ones(n - n // 2)])


def check_efficiency(model: ModelSpec, score="gaussian", n=2000, replicates=500, seed=0,
                     alt_reference: ReferenceDensity | None = None, nr=None, ns=None,
                     alpha=ALPHA, corr_min=0.95, var_tol=0.10, grid_seed=0,
                     n_jobs=1) -> CheckReport:
    """Parametric central sequence versus the matched-score rank statistic.

    Both use the centered constants of the design: the model's first
    covariate for regression, the two-sample split for location.
    """
    t0 = time.perf_counter()
    f0 = model.f0
    d = model.d
    alt = alt_reference if alt_reference is not None else SphericalT(d, 3.0)
    c = model.covariates[:, 0] if model.kind == "linear_regression" else two_sample_constants(n)
    cc, norm = centered_constants(c, n)
    grid = _grid(n, d, nr, ns, grid_seed)
    Jg = score_from_name(score, d, f0)(grid.points)

    def sampler(ref, stream):
        def one(r):
            z, perm = replicate_pairing(ref, grid, seed, stream, r)
            return cc @ f0.score(z) / norm, cc @ Jg[perm] / norm
        out = run_replicates(one, replicates, n_jobs)
        return np.array([o[0] for o in out]), np.array([o[1] for o in out])

    cs0, rk0 = sampler(f0, 0)
    cs1, rk1 = sampler(alt, 1)
    report = CheckReport("efficiency", replicates, seed, alpha,
                         config={"n": n, "grid": grid.spec.to_dict(), "score": score,
                                 "density": f0.to_dict(), "alternative": alt.to_dict(),
                                 "design": model.kind, "corr_min": corr_min, "var_tol": var_tol})
    pair = f"{f0.name}~{alt.name}"
    for j in range(cs0.shape[1]):
        r = _corr(cs0[:, j], rk0[:, j])
        ratio = float(rk0[:, j].var(ddof=1) / cs0[:, j].var(ddof=1))
        report.statistics[f"corr[{j + 1}]"] = r
        report.statistics[f"var_ratio[{j + 1}]"] = ratio
        report.gate(f"corr(central sequence, rank statistic)[{j + 1}]", r, ">=", corr_min)
        report.gate(f"|var ratio - 1|[{j + 1}]", abs(ratio - 1), "<=", var_tol)
        p_rank = _ks(rk0[:, j], rk1[:, j])
        report.p_values[f"KS rank statistic {pair}[{j + 1}]"] = p_rank
        report.p_values[f"KS central sequence {pair}[{j + 1}]"] = _ks(cs0[:, j], cs1[:, j])
        report.gate(f"KS rank statistic {pair}[{j + 1}]", p_rank, ">", alpha)
    # the squared norm separates scale changes far better than single coordinates
    sq = lambda a: np.sum(a * a, axis=1)
    p_rank = _ks(sq(rk0), sq(rk1))
    p_cs = _ks(sq(cs0), sq(cs1))
    report.p_values[f"KS rank statistic {pair}[|.|^2]"] = p_rank
    report.p_values[f"KS central sequence {pair}[|.|^2]"] = p_cs
    report.gate(f"KS rank statistic {pair}[|.|^2]", p_rank, ">", alpha)
    report.gate(f"KS central sequence {pair}[|.|^2] (must reject)", p_cs, "<", alpha)
    return _finish(report, t0)


def null_drift_paths(info: InformationStructure, n_paths: int, seed=0, time_grid=None):
    """Paths under ``(0, 0)`` as drawn by :func:`check_limit_experiment`."""
    tg = DriftConfig(info).time_grid if time_grid is None else time_grid
    return sample_drift_path(DriftConfig(info, time_grid=tg, seed=derive_seed(seed, 21)), n_paths)


def check_limit_experiment(info: InformationStructure, local_list, n_paths=10**4, seed=0,
                           time_grid=None, alpha=ALPHA) -> CheckReport:
    """Properties of the limiting experiment over simulated drift paths.

    Under ``(0, 0)``: shift and drift log-likelihoods coincide exactly,
    ``exp(LLR)`` has mean 1, bridges vanish at both ends, have variance
    ``u (1 - u) I_etaeta`` and are uncorrelated with the endpoint. Bridges
    drawn under each tangent drift (independent seed) must have the same law.
    """
    t0 = time.perf_counter()
    paths = null_drift_paths(info, n_paths, seed, time_grid)
    tg = paths.time_grid
    inner = np.flatnonzero((tg > 0) & (tg < 1))
    se_band = SE_MULT
    report = CheckReport("limit_experiment", n_paths, seed, alpha,
                         config={"information": info.to_dict(), "time_grid": tg.tolist(),
                                 "local": [[np.asarray(t, float).tolist(), j] for t, j in local_list],
                                 "paths": n_paths, "se_band": se_band})
    for tau, j in local_list:
        name = f"tau={np.asarray(tau, float).tolist()}, eta={'0' if j is None else info.labels[j]}"
        shift = loglik_shift(paths.endpoint, info, tau, j)
        drift = loglik_drift(paths, tau, j)
        report.gate(f"max |loglik_shift - loglik_drift| [{name}]",
                    float(np.max(np.abs(shift - drift))), "<=", 0.0)
        lr = np.exp(drift)
        mean = float(lr.mean())
        se = float(lr.std(ddof=1) / math.sqrt(n_paths))
        report.statistics[f"mean exp(LLR) [{name}]"] = mean
        if se == 0:
            report.gate(f"exp(LLR) identically 1 [{name}]", abs(mean - 1), "<=", 0.0)
        else:
            report.gate(f"|mean exp(LLR) - 1|/se [{name}]", abs(mean - 1) / se, "<=", se_band)

    thr = se_band / math.sqrt(n_paths)
    for e, lab in enumerate(info.labels):
        bridge = extract_bridge(paths, e).values
        report.gate(f"max |B(0)|, |B(1)| [{lab}]",
                    float(np.abs(bridge[:, [0, -1]]).max()), "<=", 0.0)
        endpoint = paths.endpoint[:, info.k + e]
        i_ee = info.I_etaeta[e, e]
        for t in inner:
            u = float(tg[t])
            b = bridge[:, t]
            dev2 = (b - b.mean()) ** 2
            var = float(dev2.sum() / (n_paths - 1))
            se = float(dev2.std(ddof=1) / math.sqrt(n_paths))
            target = u * (1 - u) * i_ee
            report.statistics[f"var B[{lab};{u}]"] = var
            report.statistics[f"u(1-u)I [{lab};{u}]"] = target
            report.gate(f"|var B - u(1-u)I|/se [{lab};{u}]", abs(var - target) / se, "<=", se_band)
            r = _corr(b, endpoint)
            report.statistics[f"corr(B[{lab};{u}], endpoint)"] = r
            report.gate(f"|corr(B[{lab};{u}], endpoint)|", abs(r), "<", thr)
        for e2, lab2 in enumerate(info.labels):
            cfg2 = DriftConfig(info, time_grid=tg, eta_index=e2, seed=derive_seed(seed, 22, e2))
            other = extract_bridge(sample_drift_path(cfg2, n_paths), e).values
            for t in inner:
                u = float(tg[t])
                p = _ks(bridge[:, t], other[:, t])
                report.p_values[f"KS B[{lab};{u}] drift 0 vs {lab2}"] = p
                report.gate(f"KS B[{lab};{u}] drift 0 vs {lab2}", p, ">", alpha)
    return _finish(report, t0)
