"""Command-line experiment runner.

    bayesdesk run <experiment> [--seed N] [--iters N] [--out PATH] [--format json|csv]
    bayesdesk list

Exit codes: 0 success, 2 invalid parameters, 3 numeric guard tripped,
64 usage error (unknown experiment, malformed flags).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import stats

from . import capture, dist, fields, mcmc, mixtures, montecarlo, timeseries
from .errors import NumericGuardError, ParameterError

EXIT_OK, EXIT_PARAM, EXIT_NUMERIC, EXIT_USAGE = 0, 2, 3, 64


# Reports -----------------------------------------------------------------

def _plain(v):
    """Convert numpy scalars and arrays to JSON-native values."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


@dataclass
class ExperimentReport:
    experiment: str
    parameters: dict
    seed: int
    estimates: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    wall_ms: float | None = None
    trace: np.ndarray | None = field(default=None, compare=False, repr=False)
    elapsed_ms: float = field(default=0.0, compare=False, repr=False)

    def to_dict(self) -> dict:
        d = {"experiment": self.experiment, "seed": self.seed,
             "parameters": _plain(self.parameters), "estimates": _plain(self.estimates),
             "diagnostics": _plain(self.diagnostics)}
        if self.wall_ms is not None:
            d["wall_ms"] = float(self.wall_ms)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(d["experiment"], d["parameters"], d["seed"], d.get("estimates", {}),
                   d.get("diagnostics", {}), d.get("wall_ms"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        """``key,value`` rows; values are JSON-encoded so the round trip is lossless."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        d = self.to_dict()
        w.writerow(["experiment", json.dumps(d["experiment"])])
        w.writerow(["seed", json.dumps(d["seed"])])
        for section in ("parameters", "estimates", "diagnostics"):
            for k in sorted(d[section]):
                w.writerow([f"{section}.{k}", json.dumps(d[section][k], sort_keys=True)])
        if "wall_ms" in d:
            w.writerow(["wall_ms", json.dumps(d["wall_ms"])])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ExperimentReport":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["key", "value"]:
            raise ParameterError("missing key,value header")
        d: dict = {"parameters": {}, "estimates": {}, "diagnostics": {}}
        for key, value in rows[1:]:
            section, _, name = key.partition(".")
            if name:
                d[section][name] = json.loads(value)
            else:
                d[key] = json.loads(value)
        return cls.from_dict(d)


def trace_to_csv(trace: np.ndarray) -> str:
    """Long format ``iteration,dim,value``, one row per entry."""
    tr = np.asarray(trace, dtype=float)
    if tr.ndim == 1:
        tr = tr[:, None]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iteration", "dim", "value"])
    for i, row in enumerate(tr):
        for j, v in enumerate(row):
            w.writerow([i, j, repr(float(v))])
    return buf.getvalue()


def emit(report: ExperimentReport, fmt: str, path: str | Path | None) -> None:
    """Write the report (and its trace, as ``<stem>.trace.csv``) to ``path`` or stdout."""
    if fmt not in ("json", "csv"):
        raise ParameterError("format must be json or csv")
    text = report.to_json() if fmt == "json" else report.to_csv()
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    path.write_text(text, encoding="utf-8", newline="\n")
    if report.trace is not None:
        tpath = path.with_name(path.stem + ".trace.csv")
        tpath.write_text(trace_to_csv(report.trace), encoding="utf-8", newline="\n")


# Experiments -------------------------------------------------------------

def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


@dataclass
class Experiment:
    help: str
    configure: Callable[[argparse.ArgumentParser], None]
    run: Callable  # (args, rng) -> (params, estimates, diagnostics, trace)


REGISTRY: dict[str, Experiment] = {}


def experiment(name: str, help: str):
    def deco(fn):
        configure = getattr(fn, "configure", lambda p: None)
        REGISTRY[name] = Experiment(help, configure, fn)
        return fn
    return deco


def flags(*specs):
    def deco(fn):
        def configure(p):
            for args, kw in specs:
                p.add_argument(*args, **kw)
        fn.configure = configure
        return fn
    return deco


def _f(name, **kw):
    return ((name,), kw)


@experiment("darroch", "Two-stage capture posterior under the 1/N prior")
@flags(_f("--nplus", type=int, default=45), _f("--nc", type=int, default=50),
       _f("--support-max", type=int, default=None))
def _darroch(a, rng):
    post = capture.tstage_posterior(2, a.nplus, a.nc, a.support_max)
    return ({"nplus": a.nplus, "nc": a.nc, "support_max": a.support_max},
            {"mean": post.mean(), "median": post.median(), "mode": post.mode()},
            {"tail_bound": post.tail_bound, "support_max_used": post.support_max}, None)


@experiment("darroch-mle", "Hypergeometric MLE of N from (n1, n2, m2)")
@flags(_f("--n1", type=int, default=20), _f("--n2", type=int, default=30), _f("--m2", type=int, default=5))
def _darroch_mle(a, rng):
    r = capture.darroch_mle(capture.TwoStageData(a.n1, a.n2, a.m2))
    return {"n1": a.n1, "n2": a.n2, "m2": a.m2}, {"mle": r.value, "defined": r.defined}, {}, None


@experiment("tag-recovery", "Tag-recovery posterior from n1+ followed by yearly recaptures")
@flags(_f("--data", type=_ints, default=[32, 20, 8, 5, 1, 2, 0, 2, 1, 1, 0]),
       _f("--support-max", type=int, default=10000),
       _f("--exponent", choices=("displayed", "exact"), default="displayed"))
def _tag(a, rng):
    if len(a.data) < 2:
        raise ParameterError("need n1+ and at least one recapture count")
    r = capture.tag_recovery_posterior(a.data[0], a.data[1:], a.support_max, a.exponent)
    return ({"data": a.data, "support_max": a.support_max, "exponent": a.exponent},
            {"mean": r.mean, "median": r.median, "median_offset": r.median_offset,
             "crude_estimate": r.crude_estimate},
            {"tail_bound": r.posterior.tail_bound}, None)


@experiment("uniform-capture", "Single-stage capture posterior under π(N) ∝ 1/N")
@flags(_f("--nplus", type=int, default=3))
def _uniform(a, rng):
    r = capture.uniform_prior_posterior(a.nplus)
    return {"nplus": a.nplus}, {"median": r.median, "normalizer": r.normalizer, "mean": r.mean}, {}, None


@experiment("tstage-mh", "MH-within-Gibbs for the T-stage capture model, against exact summation")
@flags(_f("--T", type=int, default=2), _f("--nplus", type=int, default=10), _f("--nc", type=int, default=12))
def _tstage(a, rng):
    tr = capture.tstage_mh_posterior(a.T, a.nplus, a.nc, a.iters or 100_000, rng)
    exact = capture.tstage_posterior(a.T, a.nplus, a.nc)
    N = tr.kept[:, 0].astype(int)
    emp = np.bincount(N - exact.support_min, minlength=exact.log_mass.size)[: exact.log_mass.size] / N.size
    tv = 0.5 * (np.abs(emp - exact.mass).sum() + np.mean(N > exact.support_max))
    return ({"T": a.T, "nplus": a.nplus, "nc": a.nc, "iters": tr.iterations},
            {"chain_mean_N": float(N.mean()), "exact_mean_N": exact.mean()},
            {"tv_distance": tv, "acceptance_rate": tr.acceptance_rate}, tr.draws)


@experiment("beta-from-ci", "Beta prior matching a mean and a credible interval")
@flags(_f("--mean", type=float, default=0.4), _f("--lo", type=float, default=0.1),
       _f("--hi", type=float, default=0.6), _f("--coverage", type=float, default=0.9))
def _beta_ci(a, rng):
    r = capture.beta_from_mean_ci(a.mean, a.lo, a.hi, a.coverage)
    return ({"mean": a.mean, "lo": a.lo, "hi": a.hi, "coverage": a.coverage},
            {"alpha_scale": r.alpha_scale, "achieved": r.achieved,
             "a": r.distribution.params[0], "b": r.distribution.params[1]}, {}, None)


@experiment("beta-binomial-gibbs", "Two-block Gibbs sampler whose θ-marginal is Be(a, b)")
@flags(_f("--n", type=int, default=18), _f("--a", type=float, default=2.5), _f("--b", type=float, default=2.5))
def _bb(a, rng):
    tr = mcmc.gibbs_beta_binomial(a.n, a.a, a.b, a.iters or 100_000, rng)
    th = tr.kept[:, 0]
    ks = stats.kstest(th, stats.beta(a.a, a.b).cdf)
    return ({"n": a.n, "a": a.a, "b": a.b, "iters": tr.iterations},
            {"theta_mean": float(th.mean()), "exact_mean": a.a / (a.a + a.b)},
            {"ks_statistic": ks.statistic, "ks_pvalue": ks.pvalue}, tr.draws)


@experiment("em-mixture", "EM runs on synthetic two-component data from random starts")
@flags(_f("--n", type=int, default=324), _f("--starts", type=int, default=20), _f("--steps", type=int, default=200))
def _em(a, rng):
    x = mixtures.simulate_em_dataset(rng, a.n)
    best, min_delta, paths = None, math.inf, []
    for s in range(a.starts):
        r = mixtures.em_fit(x, mixtures.em_random_start(x, rng), a.steps)
        if r.loglik.size > 1:
            min_delta = min(min_delta, float(np.diff(r.loglik).min()))
        paths.append(np.column_stack([np.full(r.loglik.size, s), r.loglik]))
        if best is None or r.loglik[-1] > best.loglik[-1]:
            best = r
    fit = best.path[-1]
    return ({"n": a.n, "starts": a.starts, "steps": a.steps},
            {"loglik": float(best.loglik[-1]), "p": fit.p, "mu": list(fit.mu), "sigma2": list(fit.sigma2)},
            {"min_loglik_increment": min_delta}, np.vstack(paths))


@experiment("ising-threshold", "β at which Gibbs simulations of a two-color field become uniform")
@flags(_f("--rows", type=int, default=5), _f("--cols", type=int, default=5),
       _f("--precision", type=float, default=0.1), _f("--sweeps", type=int, default=1000),
       _f("--reps", type=int, default=100), _f("--direction", choices=("positive", "negative"), default="positive"),
       _f("--schedule", choices=fields.SCHEDULES, default="random_scan"))
def _ising(a, rng):
    t = fields.beta_threshold_experiment(a.rows, a.cols, a.precision, a.sweeps, a.reps, rng,
                                         a.direction, a.schedule)
    q = np.nanpercentile(t, [25, 50, 75]) if np.isfinite(t).any() else [math.nan] * 3
    return ({"rows": a.rows, "cols": a.cols, "precision": a.precision, "sweeps": a.sweeps,
             "reps": a.reps, "direction": a.direction, "schedule": a.schedule},
            {"q25": q[0], "median": q[1], "q75": q[2]},
            {"unresolved": int(np.isnan(t).sum())}, t)


@experiment("abc-binomial", "Rejection ABC for a binomial success probability with a uniform prior")
@flags(_f("--n", type=int, default=5), _f("--x", type=int, default=2), _f("--eps", type=float, default=0.0),
       _f("--props", type=int, default=100_000))
def _abc(a, rng):
    r = fields.abc_posterior(lambda th, g: g.binomial(a.n, th), lambda g, k: g.uniform(size=k),
                             lambda d: d, a.x, a.eps, a.props, rng)
    ks = stats.kstest(r.accepted, stats.beta(a.x + 1, a.n - a.x + 1).cdf)
    return ({"n": a.n, "x": a.x, "eps": a.eps, "props": a.props},
            {"posterior_mean": float(r.accepted.mean()), "acceptance_rate": r.acceptance_rate},
            {"ks_statistic": ks.statistic, "ks_pvalue": ks.pvalue, "accepted": int(r.accepted.size)}, None)


@experiment("ar1-posterior", "Closed-form AR(1) posterior on given or simulated data")
@flags(_f("--data", type=_floats, default=None), _f("--rho", type=float, default=0.5), _f("--T", type=int, default=100))
def _ar1(a, rng):
    if a.data is None:
        x = np.zeros(a.T + 1)
        for t in range(1, a.T + 1):
            x[t] = a.rho * x[t - 1] + rng.standard_normal()
    else:
        x = np.asarray(a.data)
    p = timeseries.ar1_posterior(x)
    pred = p.predictive()
    return ({"data": None if a.data is None else a.data, "rho": a.rho, "T": int(x.size - 1)},
            {"mu_T": p.mu_T, "nu2_T": p.nu2_T, "delta_T": p.delta_T, "predictive_scale2": pred.params[2]},
            {}, None)


@experiment("ar-stationary", "Stationary covariance of an AR(p) through the fixed point A = BAB' + V")
@flags(_f("--rho", type=_floats, default=[0.5]), _f("--sigma2", type=float, default=1.0))
def _ar_stat(a, rng):
    A = timeseries.ar_stationary_covariance(timeseries.companion_matrix(a.rho), a.sigma2)
    return {"rho": a.rho, "sigma2": a.sigma2}, {"variance": float(A[0, 0]), "covariance": A}, {}, None


@experiment("bayes-factor-mc", "Monte Carlo Bayes factor for the two-sample normal problem")
@flags(_f("--xbar", type=float, default=0.5), _f("--ybar", type=float, default=0.0),
       _f("--s2", type=float, default=1.0), _f("--n", type=int, default=5), _f("--tau", type=float, default=1.0))
def _bf(a, rng):
    sims = a.iters or 1_000_000
    b = montecarlo.bayes_factor_mc_two_sample(a.xbar, a.ybar, a.s2, a.n, a.tau, sims, rng)
    return ({"xbar": a.xbar, "ybar": a.ybar, "s2": a.s2, "n": a.n, "tau": a.tau, "sims": sims},
            {"bayes_factor": b}, {}, None)


@experiment("harmonic-mean", "Harmonic-mean evidence against the exact normal-precision evidence")
@flags(_f("--n", type=int, default=8), _f("--sd", type=float, default=100.0),
       _f("--shape", type=float, default=1.0), _f("--rate", type=float, default=1.0))
def _hm(a, rng):
    x = a.sd * rng.standard_normal(a.n)
    draws = a.iters or 10_000
    tau = dist.sample(montecarlo.precision_posterior(x, a.shape, a.rate), rng, draws)
    lh = montecarlo.log_harmonic_mean_evidence(montecarlo.precision_loglik(x, tau))
    le = montecarlo.log_exact_precision_evidence(x, a.shape, a.rate)
    return ({"n": a.n, "sd": a.sd, "shape": a.shape, "rate": a.rate, "draws": draws},
            {"log_harmonic_mean": lh, "log_exact": le},
            {"log10_ratio": (lh - le) / math.log(10)}, None)


@experiment("accept-reject", "Accept-reject from a uniform envelope with a planted normalizing constant")
@flags(_f("--scale", type=float, default=3.0), _f("--m-tilde", type=float, default=4.5),
       _f("--a", type=float, default=2.0), _f("--b", type=float, default=2.0))
def _ar(a, rng):
    target = stats.beta(a.a, a.b)
    count = a.iters or 100_000
    r = montecarlo.accept_reject(lambda x: math.log(a.scale) + target.logpdf(x), dist.beta(1, 1),
                                 a.m_tilde, count, rng)
    c = montecarlo.estimate_normalizing_constant(r)
    return ({"scale": a.scale, "m_tilde": a.m_tilde, "a": a.a, "b": a.b, "count": count},
            {"normalizing_constant": c, "planted": 1 / a.scale, "trials_per_draw": r.trials / count},
            {"acceptance_rate": r.acceptance_rate}, None)


@experiment("hpd-cauchy", "HPD region of a Cauchy-location posterior on a grid")
@flags(_f("--data", type=_floats, default=[0.0, 5.0, 9.0]), _f("--prior-var", type=float, default=10.0),
       _f("--alpha", type=float, default=0.95), _f("--lo", type=float, default=-20.0),
       _f("--hi", type=float, default=30.0), _f("--points", type=int, default=10_001))
def _hpd(a, rng):
    grid = np.linspace(a.lo, a.hi, a.points)
    logf = montecarlo.cauchy_posterior_log_unnorm(a.data, a.prior_var)
    r = montecarlo.hpd_from_grid(logf, grid, a.alpha)
    return ({"data": a.data, "prior_var": a.prior_var, "alpha": a.alpha, "lo": a.lo, "hi": a.hi,
             "points": a.points},
            {"region": [list(iv) for iv in r.region], "region_mass": r.region_mass, "level": r.level},
            {"intervals": len(r.region)}, np.column_stack([grid, np.exp(logf(grid))]))


@experiment("schur-test", "Schur transform test for roots outside the unit circle")
@flags(_f("--coeffs", type=_floats, default=[1.0, 0.0, -0.25]))
def _schur(a, rng):
    poly = timeseries.LagPolynomial(a.coeffs)
    r = timeseries.schur_root_test(poly)
    roots = poly.roots()
    return ({"coeffs": a.coeffs},
            {"all_outside": r.all_outside, "path": [list(c) for c in r.path]},
            {"min_root_modulus": float(np.abs(roots).min()) if roots.size else math.inf}, None)


def _random_hmm(rng, kappa):
    P = rng.dirichlet(np.ones(kappa), size=kappa)
    phi = rng.uniform(-0.9, 0.9, size=kappa)
    sig = rng.uniform(0.5, 2.0, size=kappa)
    spec = timeseries.HmmSpec(P, lambda xp, x: stats.norm.logpdf(x, phi * xp, sig))
    return spec, P, phi, sig


@experiment("forward-filter", "Forward filter on a random Markov-switching AR(1)")
@flags(_f("--kappa", type=int, default=2), _f("--T", type=int, default=6))
def _ff(a, rng):
    spec, P, phi, sig = _random_hmm(rng, a.kappa)
    y = rng.integers(a.kappa, size=a.T)
    x = np.zeros(a.T + 1)
    for t in range(a.T):
        x[t + 1] = phi[y[t]] * x[t] + sig[y[t]] * rng.standard_normal()
    init = np.full(a.kappa, 1.0 / a.kappa)
    r = timeseries.hmm_forward_loglik(spec, x, init)
    return ({"kappa": a.kappa, "T": a.T}, {"loglik": r.loglik}, {"failed_at": r.failed_at}, r.phi)


@experiment("partition-exact", "Exact log partition sum of a Potts field by enumeration")
@flags(_f("--rows", type=int, default=3), _f("--cols", type=int, default=5), _f("--beta", type=float, default=0.0),
       _f("--colors", type=int, default=2), _f("--neighborhood", choices=fields.NEIGHBORHOODS, default="four"))
def _part(a, rng):
    lz = fields.exact_partition(a.rows, a.cols, a.colors, a.beta, a.neighborhood)
    return ({"rows": a.rows, "cols": a.cols, "beta": a.beta, "colors": a.colors, "neighborhood": a.neighborhood},
            {"log_sum": lz, "reciprocal": math.exp(-lz)}, {}, None)


@experiment("two-beta-check", "Compare the agreement form of the Ising law with the 2β single-color form on 1x2")
@flags(_f("--beta", type=float, default=1.0))
def _two_beta(a, rng):
    t1, t2 = fields.two_beta_tables(a.beta)
    return ({"beta": a.beta}, {"agreement_table": t1, "single_color_table": t2},
            {"max_abs_difference": float(np.abs(t1 - t2).max())}, None)


@experiment("l4-cluster", "L4 clustering of a noisy two-block co-assignment matrix")
@flags(_f("--sites", type=int, default=6), _f("--colors", type=int, default=2),
       _f("--noise", type=float, default=0.2), _f("--starts", type=int, default=10))
def _l4(a, rng):
    truth = np.arange(a.sites) % 2
    P = (truth[:, None] == truth[None, :]).astype(float)
    E = rng.uniform(0, a.noise, size=P.shape)
    P = np.clip(np.abs(P - (E + E.T) / 2), 0, 1)
    np.fill_diagonal(P, 1.0)
    r = fields.l4_clustering(P, a.colors, rng, a.starts)
    return ({"sites": a.sites, "colors": a.colors, "noise": a.noise, "starts": a.starts},
            {"labels": r.labels, "risk": r.risk},
            {"final_risks": r.final_risks, "start_risks": r.start_risks}, None)


# Entry point -------------------------------------------------------------

class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bayesdesk", description="Desk-scale Bayesian experiments")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("list", help="list registered experiments")
    run = sub.add_parser("run", help="run an experiment")
    exp = run.add_subparsers(dest="experiment", parser_class=_Parser, metavar="EXPERIMENT")
    for name, e in REGISTRY.items():
        ep = exp.add_parser(name, help=e.help)
        ep.add_argument("--seed", type=int, default=dist.DEFAULT_SEED)
        ep.add_argument("--iters", type=int, default=None)
        ep.add_argument("--out", default=None)
        ep.add_argument("--format", choices=("json", "csv"), default="json")
        ep.add_argument("--timing", action="store_true", help="include wall time in the report")
        e.configure(ep)
    return p


def run(experiment: str, argv: list[str] | None = None) -> ExperimentReport:
    """Run a registered experiment with CLI-style flags and return its report."""
    if experiment not in REGISTRY:
        raise UsageError(f"unknown experiment {experiment!r}")
    args = build_parser().parse_args(["run", experiment, *(argv or [])])
    return _execute(args)


def _execute(args) -> ExperimentReport:
    exp = REGISTRY[args.experiment]
    rng = dist.make_rng(args.seed)
    t0 = time.perf_counter()
    params, est, diag, trace = exp.run(args, rng)
    wall = 1000 * (time.perf_counter() - t0)
    if args.iters is not None:
        params = {**params, "iters": args.iters}
    return ExperimentReport(args.experiment, params, args.seed, est, diag,
                            wall if args.timing else None, trace, wall)


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    if args.command == "list":
        for name, e in REGISTRY.items():
            print(f"{name:22s} {e.help}")
        return EXIT_OK
    if args.command != "run" or args.experiment is None:
        print("usage: bayesdesk {list,run} ...", file=sys.stderr)
        return EXIT_USAGE
    try:
        rep = _execute(args)
        emit(rep, args.format, args.out)
    except ParameterError as e:
        print(f"parameter error: {e}", file=sys.stderr)
        return EXIT_PARAM
    except NumericGuardError as e:
        print(f"numeric guard: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"{args.experiment}: {rep.elapsed_ms:.1f} ms", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
