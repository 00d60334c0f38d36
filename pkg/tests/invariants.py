"""Seed-parameterized invariant checks shared by the module tests and the acceptance suite.

Each check takes a seed, raises AssertionError on failure and returns
nothing.  ``run(name, seed)`` caches the outcome so a check requested by
both a module test and the acceptance suite only runs once per session.
"""

from __future__ import annotations

import functools
import itertools
import math
from typing import Callable

import numpy as np
from scipy import integrate, special, stats

from bayesdesk import capture, conjugate, dist, fields, mcmc, mixtures, montecarlo, timeseries

SEEDS = (42, 7, 2024)
REGISTRY: dict[str, Callable[[int], None]] = {}


def invariant(module: str):
    def deco(fn):
        REGISTRY[f"{module}.{fn.__name__}"] = fn
        return fn
    return deco


@functools.lru_cache(maxsize=None)
def _outcome(name: str, seed: int) -> str | None:
    try:
        REGISTRY[name](seed)
    except AssertionError as exc:
        return f"{type(exc).__name__}: {exc}"
    return None


def run(name: str, seed: int) -> None:
    msg = _outcome(name, seed)
    if msg is not None:
        raise AssertionError(f"{name} (seed {seed}): {msg}")


def names(module: str | None = None) -> list[str]:
    return sorted(k for k in REGISTRY if module is None or k.startswith(module + "."))


# Helpers -----------------------------------------------------------------

def tv(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float)).sum())


def empirical_law(codes, size: int) -> np.ndarray:
    return np.bincount(np.asarray(codes).ravel(), minlength=size) / np.asarray(codes).size


def family_ok(pvalues, level: float = 0.01) -> bool:
    """Bonferroni: a family of tests passes at ``level`` when every p exceeds level/m."""
    p = np.asarray(pvalues, dtype=float)
    return bool(np.all(p > level / p.size))


# dist --------------------------------------------------------------------

@invariant("dist")
def reproducible_streams(seed):
    a = dist.make_rng(seed).standard_normal(1000)
    b = dist.make_rng(seed).standard_normal(1000)
    assert a.tobytes() == b.tobytes()
    c1, c2 = dist.spawn_rngs(seed, 2), dist.spawn_rngs(seed, 2)
    assert all(x.random(10).tobytes() == y.random(10).tobytes() for x, y in zip(c1, c2))


@invariant("dist")
def quadrature_normalization(seed):
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.5, 4.0, size=4)
    cases = [
        (dist.normal(rng.normal(), u[0]), -np.inf, np.inf),
        (dist.gamma(u[1] + 1, u[2]), 0, np.inf),
        (dist.inverse_gamma(u[1] + 1, u[3]), 0, np.inf),
        (dist.beta(u[0] + 1, u[2] + 1), 0, 1),
        (dist.student_t(u[3], rng.normal(), u[1]), -np.inf, np.inf),
        (dist.cauchy(rng.normal(), u[2]), -np.inf, np.inf),
        (dist.truncated_normal(rng.normal(), "positive"), 0, np.inf),
        (dist.truncated_normal(rng.normal(), "negative"), -np.inf, 0),
    ]
    for d, lo, hi in cases:
        val, _ = integrate.quad(lambda x: math.exp(dist.log_pdf(d, x)), lo, hi,
                                epsabs=1e-12, epsrel=1e-10, limit=500)
        assert abs(val - 1) < 1e-5, (d, val)


@invariant("dist")
def truncated_normal_vs_rejection(seed):
    rng = np.random.default_rng(seed)
    pvals = []
    for mu, side in ((rng.uniform(-1.5, 1.5), "positive"), (rng.uniform(-1.5, 1.5), "negative")):
        draws = dist.sample_truncated_normal(mu, side, rng, 100_000)
        raw = rng.normal(mu, 1.0, 2_000_000)
        oracle = raw[raw > 0] if side == "positive" else raw[raw < 0]
        oracle = oracle[:100_000]
        assert oracle.size == 100_000
        pvals.append(stats.ks_2samp(draws, oracle).pvalue)
    assert family_ok(pvals), pvals


# conjugate ---------------------------------------------------------------

@invariant("conjugate")
def conjugacy_closure(seed):
    rng = np.random.default_rng(seed)
    a, b = (int(v) for v in rng.integers(1, 6, size=2))
    rows = [
        ("normal_mean", dist.normal(0.0, 2.0), rng.normal(size=2), {"sigma2": 1.5}),
        ("poisson", dist.gamma(a, b), rng.integers(0, 9, size=2), {}),
        ("gamma", dist.gamma(a, b), rng.integers(1, 5, size=2), {"shape": 3}),
        ("binomial", dist.beta(a, b), rng.integers(0, 11, size=2), {"n": 10}),
        ("neg_binomial", dist.beta(a, b), rng.integers(0, 7, size=2), {"m": 4}),
        ("multinomial", dist.dirichlet([a, b, 1]), rng.integers(0, 5, size=(2, 3)), {}),
        ("normal_precision", dist.gamma(a, b), rng.integers(-3, 4, size=2), {"mu": 1}),
    ]
    for fam, prior, (x1, x2), known in rows:
        one = conjugate.conjugate_update(fam, prior, x1, **known)
        two = conjugate.conjugate_update(fam, one, x2, **known)
        assert one.family is prior.family and two.family is prior.family
        rev = conjugate.conjugate_update(fam, conjugate.conjugate_update(fam, prior, x2, **known), x1, **known)
        if fam == "normal_mean":
            np.testing.assert_allclose(two.params, rev.params, rtol=1e-12)
        else:
            # integer data keep every parameter a half-integer: exact equality
            assert two.params == rev.params, (fam, two.params, rev.params)
    # batch normal-mean update: precision-weighted average of the pair
    s2, x1, x2 = 1.5, *rows[0][2]
    seq = conjugate.conjugate_update("normal_mean", conjugate.conjugate_update(
        "normal_mean", dist.normal(0.0, 2.0), x1, sigma2=s2), x2, sigma2=s2)
    batch = dist.normal(0.5 * (x1 + x2) * 2.0 / (2.0 + s2 / 2), 1 / (1 / 2.0 + 2 / s2))
    np.testing.assert_allclose(seq.params, batch.params, rtol=1e-12)


@invariant("conjugate")
def nig_sigma2_marginal(seed):
    rng = np.random.default_rng(seed)
    prior = conjugate.NigParams(rng.normal(), rng.uniform(0.5, 3), rng.uniform(2, 5), rng.uniform(0.5, 3))
    post = conjugate.nig_posterior(prior, rng.normal(1.0, 2.0, size=12))
    ig = post.as_prior().sigma2_marginal()

    def kernel(mu, s2):
        return s2 ** -post.lambda_sigma * math.exp(-(post.lambda_mu * (mu - post.xi) ** 2 + post.alpha) / (2 * s2))

    def marg(s2):
        return integrate.quad(lambda m: kernel(m, s2), -np.inf, np.inf, epsabs=0, epsrel=1e-11)[0]

    grid = np.quantile(dist.sample(ig, rng, 2000), [0.1, 0.3, 0.5, 0.7, 0.9])
    ratio = np.array([marg(s) / math.exp(dist.log_pdf(ig, s)) for s in grid])
    np.testing.assert_allclose(ratio / ratio[0], 1.0, rtol=1e-7)

    # prior side: σ² ~ IG(λσ, α) and the μ marginal integrates out σ²
    mu = rng.normal(prior.xi, 1.0)
    val = integrate.quad(lambda s: math.exp(dist.log_pdf(dist.normal(prior.xi, s / prior.lambda_mu), mu)
                                            + dist.log_pdf(prior.sigma2_marginal(), s)),
                         0, np.inf, epsabs=0, epsrel=1e-11)[0]
    np.testing.assert_allclose(val, math.exp(conjugate.nig_marginal_mu_logpdf(prior, mu)), rtol=1e-7)


@invariant("conjugate")
def gprior_determinant(seed):
    rng = np.random.default_rng(seed)
    for _ in range(100):
        n = int(rng.integers(2, 21))
        p = int(rng.integers(1, min(5, n - 1) + 1))
        X = rng.normal(size=(n, p))
        for g in (0.5, 1.0, 10.0):
            r = conjugate.gprior_det_identity(X, g)
            assert abs(r.det - r.expected) / r.expected < 1e-8


@invariant("conjugate")
def gprior_eigenvalues(seed):
    rng = np.random.default_rng(seed)
    for _ in range(50):
        n = int(rng.integers(3, 21))
        p = int(rng.integers(1, min(5, n - 1) + 1))
        X = rng.normal(size=(n, p))
        g = float(rng.choice([0.5, 1.0, 10.0]))
        ev = np.sort(conjugate.gprior_eigenvalues(X, g))
        np.testing.assert_allclose(ev, np.r_[np.ones(n - p), np.full(p, g + 1)], atol=1e-8)


@invariant("conjugate")
def regression_flat_limit(seed):
    rng = np.random.default_rng(seed)
    n, k = 30, 3
    X = np.column_stack([np.ones(n), rng.normal(size=(n, k - 1))])
    y = X @ rng.normal(size=k) + rng.normal(size=n)
    prior = conjugate.RegressionConjugate(np.zeros(k), 1e-10 * np.eye(k), 1e-10, 1e-10)
    post = conjugate.regression_posterior(prior, X, y)
    jt = conjugate.jeffreys_regression_posterior(X, y)
    bm = post.beta_marginal()
    np.testing.assert_allclose(bm.loc, jt.loc, rtol=1e-7, atol=1e-9)
    # the conjugate limit carries σ^{-k} from β | σ², so it has k more degrees
    # of freedom; df times scale is the residual sum of squares in both
    np.testing.assert_allclose(bm.df - jt.df, k, atol=1e-8)
    np.testing.assert_allclose(bm.df * bm.scale, jt.df * jt.scale, rtol=1e-7)


# montecarlo --------------------------------------------------------------

@invariant("montecarlo")
def is_ess_equals_n(seed):
    rng = np.random.default_rng(seed)
    d = dist.student_t(4, 1.0, 2.0)
    x = dist.sample(d, rng, 5000)
    res = montecarlo.importance_estimate(lambda t: t, lambda t: dist.log_pdf(d, t) + 3.0,
                                         lambda t: dist.log_pdf(d, t), x)
    assert res.ess == 5000.0
    np.testing.assert_allclose(res.estimate, x.mean(), rtol=1e-12)


def _beta22_log_unnorm(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(3.0) + stats.beta.logpdf(x, 2, 2)
    return np.where((x > 0) & (x < 1), out, -np.inf)


@invariant("montecarlo")
def accept_reject_exchangeable(seed):
    prop = dist.beta(1, 1)
    ss = np.random.SeedSequence(seed)
    r1, r2 = (np.random.default_rng(s) for s in ss.spawn(2))
    r2.random(12_345)  # shift the stream start
    a = montecarlo.accept_reject(_beta22_log_unnorm, prop, 4.5, 20_000, r1).draws
    b = montecarlo.accept_reject(_beta22_log_unnorm, prop, 4.5, 20_000, r2).draws
    pvals = [stats.ks_2samp(a, b).pvalue, stats.kstest(a, stats.beta(2, 2).cdf).pvalue]
    assert family_ok(pvals), pvals


@invariant("montecarlo")
def normalizing_constant_rate(seed):
    rng = np.random.default_rng(seed)
    prop = dist.beta(1, 1)
    budgets = 50 * 2 ** np.arange(10)
    rmse = []
    for count in budgets:
        est = [montecarlo.estimate_normalizing_constant(
            montecarlo.accept_reject(_beta22_log_unnorm, prop, 4.5, int(count), rng, block=int(min(4096, 2 * count))))
            for _ in range(60)]
        rmse.append(math.sqrt(np.mean((np.asarray(est) - 1 / 3) ** 2)))
    slope = np.polyfit(np.log(budgets), np.log(rmse), 1)[0]
    assert abs(slope + 0.5) <= 0.15, slope


@invariant("montecarlo")
def harmonic_mean_shift(seed):
    rng = np.random.default_rng(seed)
    ll = rng.normal(-20, 3, size=1000)
    for c in rng.uniform(-50, 50, size=5):
        np.testing.assert_allclose(montecarlo.harmonic_mean_evidence(ll + c),
                                   montecarlo.harmonic_mean_evidence(ll) * math.exp(c), rtol=1e-12)


# mcmc --------------------------------------------------------------------

def _one_step_law(logf, kernel, starts, rng):
    return np.array([mcmc.mh_chain(logf, kernel, x, 1, rng, warmup=0).draws[0, 0] for x in starts])


@invariant("mcmc")
def kernel_stationarity(seed):
    rng = np.random.default_rng(seed)
    m = 10_000
    norm = dist.normal(1.0, 2.0)
    logn = lambda x: dist.log_pdf(norm, x)
    bet = dist.beta(2.0, 3.0)
    logb = lambda x: dist.log_pdf(bet, x)
    gam = dist.gamma(3.0, 2.0)
    logg = lambda x: dist.log_pdf(gam, x)
    cases = [
        (logn, mcmc.KernelSpec("independence", proposal=dist.student_t(3, 0.0, 4.0)), norm),
        (logn, mcmc.KernelSpec("random_walk", scale=1.5), norm),
        (logn, mcmc.KernelSpec("random_walk", scale=0.8, step="cauchy"), norm),
        (logn, mcmc.KernelSpec("random_walk_mixture"), norm),
        (logg, mcmc.KernelSpec("transformed_rw_log", scale=0.7), gam),
        (logb, mcmc.KernelSpec("transformed_rw_logit", scale=1.0), bet),
        (logb, mcmc.KernelSpec("random_walk", scale=0.3), bet),
    ]
    cdfs = {id(norm): stats.norm(1.0, math.sqrt(2.0)).cdf, id(bet): stats.beta(2, 3).cdf,
            id(gam): stats.gamma(3.0, scale=0.5).cdf}
    pvals = []
    for logf, kern, target in cases:
        starts = dist.sample(target, rng, m)
        moved = _one_step_law(logf, kern, starts, rng)
        assert np.mean(moved != starts) > 0.05, kern.kind
        pvals.append(stats.kstest(moved, cdfs[id(target)]).pvalue)
    assert family_ok(pvals), dict(zip((c[1].kind for c in cases), pvals))


@invariant("mcmc")
def mh_ratio_antisymmetry(seed):
    rng = np.random.default_rng(seed)
    gam = dist.gamma(2.5, 1.3)
    logg = lambda x: dist.log_pdf(gam, x)
    kernels = [mcmc.KernelSpec(k, proposal=dist.gamma(2.0, 1.0)) for k in ("independence",)]
    kernels += [mcmc.KernelSpec(k, scale=0.5) for k in ("random_walk", "transformed_rw_log")]
    pairs = rng.gamma(2.0, 1.0, size=(1000, 2)) + 0.01
    for kern in kernels:
        for x, y in pairs:
            r = mcmc.mh_log_ratio(logg, kern, x, y) + mcmc.mh_log_ratio(logg, kern, y, x)
            assert abs(math.expm1(r)) < 1e-10


@invariant("mcmc")
def log_walk_inverse_gamma_moments(seed):
    rng = np.random.default_rng(seed)
    a, b = 6.0, 5.0
    ig = dist.inverse_gamma(a, b)
    tr = mcmc.mh_chain(lambda s: dist.log_pdf(ig, s), mcmc.KernelSpec("transformed_rw_log", scale=0.6),
                       1.0, 60_000, rng, warmup=1000)
    x = tr.kept[:, 0]
    batches = x[: x.size // 50 * 50].reshape(50, -1).mean(axis=1)
    se = batches.std(ddof=1) / math.sqrt(batches.size)
    assert abs(x.mean() - ig.mean()) < 3 * se + 1e-12, (x.mean(), ig.mean(), se)
    sq = (x**2)[: x.size // 50 * 50].reshape(50, -1).mean(axis=1)
    second = ig.var() + ig.mean() ** 2
    assert abs(sq.mean() - second) < 3 * sq.std(ddof=1) / math.sqrt(50)


@invariant("mcmc")
def beta_binomial_marginal(seed):
    rng = np.random.default_rng(seed)
    a, b = 2.0, 4.0
    tr = mcmc.gibbs_beta_binomial(15, a, b, 40_000, rng)
    theta = tr.column("theta")[tr.warmup::10]
    iid = rng.beta(a, b, size=theta.size)
    assert stats.ks_2samp(theta, iid).pvalue > 0.01


# mixtures ----------------------------------------------------------------

@invariant("mixtures")
def em_monotone(seed):
    rng = np.random.default_rng(seed)
    x = mixtures.simulate_em_dataset(rng)
    for _ in range(3):
        res = mixtures.em_fit(x, mixtures.em_random_start(x, rng), 60)
        assert np.all(np.diff(res.loglik) >= -1e-9)


def _small_mixture_problem(rng):
    x = np.r_[rng.normal(0.0, 1.0, 3), rng.normal(1.5, 1.0, 3)]
    hyper = mixtures.MixtureHyper(xi=(0.0, 1.5), n_prior=(0.5, 0.5), nu=(4.0, 4.0), s2=(3.0, 3.0),
                                  alpha=1.5, beta=1.0)
    return x, hyper


@invariant("mixtures")
def allocation_law_matches_gibbs(seed):
    rng = np.random.default_rng(seed)
    x, hyper = _small_mixture_problem(rng)
    law = mixtures.enumerate_allocations(x, hyper)
    _, zs = mixtures.gibbs_mixture_chains(x, hyper, 1100, rng, chains=1000, keep_z=True)
    codes = mixtures.allocation_codes(zs[100:])
    assert codes.size == 1_000_000
    d = tv(empirical_law(codes, 2 ** x.size), np.exp(law.log_prob))
    assert d < 0.02, d


@invariant("mixtures")
def exchangeable_mean_p(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=int(rng.integers(4, 9)))
    hyper = mixtures.MixtureHyper(xi=(0.3, 0.3), n_prior=(1.0, 1.0), nu=(3.0, 3.0), s2=(2.0, 2.0),
                                  alpha=2.0, beta=2.0)
    assert abs(mixtures.exact_posterior_mean_p(x, hyper) - 0.5) < 1e-10


def _plain_location_gibbs(x, lam, delta, iters, rng, p):
    """Unannealed mean-mixture Gibbs written out directly, same draw order."""
    mu1, mu2 = float(np.quantile(x, 0.25)), float(np.quantile(x, 0.75))
    out = np.empty((iters, 2))
    for t in range(iters):
        lw1 = math.log(p) - 0.5 * (x - mu1) ** 2
        lw2 = math.log1p(-p) - 0.5 * (x - mu2) ** 2
        g = rng.gumbel(size=(2, 1, x.size))
        z = np.where(lw1 + g[0, 0] >= lw2 + g[1, 0], 1, 2)
        e = rng.standard_normal(2)
        ell = int((z == 1).sum())
        p1, p2 = lam + ell, lam + x.size - ell
        mu1 = (lam * delta + x[z == 1].sum()) / p1 + e[0] / math.sqrt(p1)
        mu2 = (lam * delta + x[z == 2].sum()) / p2 + e[1] / math.sqrt(p2)
        out[t] = mu1, mu2
    return out


@invariant("mixtures")
def annealed_unit_temperature(seed):
    x = np.random.default_rng(seed).normal(size=40) + np.r_[np.zeros(12), 2.5 * np.ones(28)]
    a = mixtures.gibbs_mixture_annealed(x, 1.0, 0.5, 1, 300, np.random.default_rng(seed), p=0.3).draws
    b = _plain_location_gibbs(x, 1.0, 0.5, 300, np.random.default_rng(seed), 0.3)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


# capture -----------------------------------------------------------------

@invariant("capture")
def discrete_posteriors_audited(seed):
    rng = np.random.default_rng(seed)
    n1, n2 = (int(v) for v in rng.integers(20, 60, size=2))
    m2 = int(rng.integers(2, 6))  # m2 = 1 leaves a 1/N tail with infinite mean
    posts = [capture.darroch_posterior(capture.TwoStageData(n1, n2, m2)),
             capture.tstage_posterior(int(rng.integers(2, 6)), 30, 45),
             capture.tag_recovery_posterior(int(rng.integers(50, 200)), rng.integers(2, 20, size=5)).posterior]
    for post in posts:
        assert post.tail_bound < 1e-8
        assert np.all(post.mass >= 0)
        np.testing.assert_allclose(post.mass.sum(), 1.0, rtol=1e-12)
    # log-space summation over a support of 10^6 points stays finite and normalized
    big = capture.darroch_posterior(capture.TwoStageData(n1, n2, 3), support_max=1_000_000)
    assert big.support_max == 1_000_000 and np.all(np.isfinite(big.log_mass))
    np.testing.assert_allclose(big.mass.sum(), 1.0, rtol=1e-10)


@invariant("capture")
def darroch_monotone_in_recaptures(seed):
    rng = np.random.default_rng(seed)
    for _ in range(3):
        n1, n2 = (int(v) for v in rng.integers(15, 60, size=2))
        means = [capture.darroch_posterior(capture.TwoStageData(n1, n2, m)).mean()
                 for m in range(2, min(n1, n2) + 1)]
        assert np.all(np.diff(means) < 0)


@invariant("capture")
def twostage_gibbs_law(seed):
    rng = np.random.default_rng(seed)
    data = capture.TwoStageData(12, 13, 5)  # n+ = 20, n^c = 25
    assert (data.n_plus, data.n_c) == (20, 25)
    exact = capture.twostage_poisson_posterior(data, 50.0)
    tr = capture.twostage_gibbs(data, 100_000, rng, prior="poisson", lam=50.0)
    N = tr.column("N")[tr.warmup:].astype(int)
    emp = np.bincount(N - exact.support_min, minlength=exact.mass.size)[: exact.mass.size] / N.size
    d = tv(emp, exact.mass)
    assert d < 0.02, d


@invariant("capture")
def openpop_samplers_agree(seed):
    rng = np.random.default_rng(seed)
    data = capture.OpenPopData(n1=30, c2=8, c3=10, r2=3)
    p, q = rng.uniform(0.2, 0.5), rng.uniform(0.1, 0.4)
    full = capture.openpop_r1_sampler(data, p, q, "full_conditional", rng, size=100_000).values
    ar = capture.openpop_r1_sampler(data, p, q, "accept_reject", rng, size=100_000)
    k = data.r1_max() + 1
    d = tv(empirical_law(full, k), empirical_law(ar.values, k))
    assert d < 0.02, d
    assert 0 < ar.acceptance_rate <= 1


# timeseries --------------------------------------------------------------

@invariant("timeseries")
def root_round_trip(seed):
    rng = np.random.default_rng(seed)
    for _ in range(200):
        p = int(rng.integers(1, 11))
        n_pairs = int(rng.integers(0, p // 2 + 1))
        mods = rng.uniform(0.1, 0.9, size=p - n_pairs)
        angles = rng.uniform(0.2, math.pi - 0.2, size=n_pairs)
        lam = list(mods[:n_pairs] * np.exp(1j * angles))
        lam += [np.conj(v) for v in lam]
        lam += list(mods[n_pairs:] * rng.choice([-1.0, 1.0], size=p - 2 * n_pairs))
        poly = timeseries.ar_coeffs_from_roots(lam)
        inv = 1.0 / poly.roots()
        got = np.sort_complex(np.round(inv, 12))
        want = np.sort_complex(np.round(np.asarray(lam, dtype=complex), 12))
        # match greedily to avoid sort ambiguity on near-equal moduli
        for w in want:
            j = int(np.argmin(np.abs(got - w)))
            assert abs(got[j] - w) < 1e-8
            got = np.delete(got, j)


def random_lag_polynomial(rng) -> timeseries.LagPolynomial:
    p = int(rng.integers(1, 11))
    kind = rng.integers(3)
    if kind == 0:
        rho = rng.normal(0, 0.5, size=p)
    elif kind == 1:
        rho = rng.uniform(-1, 1, size=p) / p
    else:
        r = rng.uniform(0.3, 1.3, size=p)
        rho = timeseries.ar_coeffs_from_roots(r * rng.choice([-1, 1], size=p)).rho
    return timeseries.LagPolynomial.from_rho(rho)


def schur_disagreements(rng, count: int, tol: float = 1e-8) -> tuple[int, int]:
    """(disagreements, skipped near-boundary cases) against the root-modulus oracle."""
    bad = skipped = 0
    for _ in range(count):
        poly = random_lag_polynomial(rng)
        mods = np.abs(poly.roots())
        if np.any(np.abs(mods - 1) < tol):
            skipped += 1
            continue
        oracle = bool(np.all(mods > 1))
        try:
            verdict = timeseries.schur_root_test(poly).all_outside
        except timeseries.BoundaryRootError:
            skipped += 1
            continue
        bad += verdict != oracle
    return bad, skipped


@invariant("timeseries")
def schur_matches_roots(seed):
    bad, skipped = schur_disagreements(np.random.default_rng(seed), 10_000)
    assert bad == 0, bad
    assert skipped < 100


def random_hmm(rng, kappa: int = 2):
    P = rng.dirichlet(np.ones(kappa), size=kappa)
    a = rng.uniform(-0.9, 0.9, size=kappa)
    s = rng.uniform(0.5, 2.0, size=kappa)

    def log_emission(x_prev, x, a=a, s=s):
        return stats.norm.logpdf(x, a * x_prev, s)

    return timeseries.HmmSpec(P, log_emission), rng.dirichlet(np.ones(kappa)), (P, a, s)


def hmm_enumeration_loglik(P, a, s, init, x) -> float:
    kappa, T = P.shape[0], len(x) - 1
    terms = []
    for path in itertools.product(range(kappa), repeat=T):
        lp = math.log(init[path[0]]) + sum(math.log(P[path[r - 1], path[r]]) for r in range(1, T))
        lp += sum(stats.norm.logpdf(x[r + 1], a[path[r]] * x[r], s[path[r]]) for r in range(T))
        terms.append(lp)
    return float(special.logsumexp(terms))


@invariant("timeseries")
def forward_relabeling(seed):
    rng = np.random.default_rng(seed)
    spec, init, (P, a, s) = random_hmm(rng, 3)
    x = rng.normal(size=25)
    base = timeseries.hmm_forward_loglik(spec, x, init).loglik
    for perm in itertools.permutations(range(3)):
        perm = np.array(perm)
        spec2 = timeseries.HmmSpec(P[np.ix_(perm, perm)],
                                   lambda xp, xc, a=a[perm], s=s[perm]: stats.norm.logpdf(xc, a * xp, s))
        got = timeseries.hmm_forward_loglik(spec2, x, init[perm]).loglik
        assert abs(got - base) < 1e-12 * max(1.0, abs(base)), (got, base)


@invariant("timeseries")
def ar1_marginal_normalized(seed):
    rng = np.random.default_rng(seed)
    x = np.zeros(30)
    for t in range(1, 30):
        x[t] = 0.6 * x[t - 1] + rng.normal()
    post = timeseries.ar1_posterior(x)
    val = integrate.quad(lambda r: math.exp(post.marginal_logpdf(r)), -np.inf, np.inf,
                         epsabs=1e-12, epsrel=1e-10)[0]
    assert abs(val - 1) < 1e-6


# fields ------------------------------------------------------------------

FIELD_CASES = [(r, c, G) for (r, c) in ((1, 2), (2, 2), (2, 3)) for G in (2, 3)]


@invariant("fields")
def gibbs_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for (rows, cols, G), beta in itertools.product(FIELD_CASES, (0.0, 0.5, 1.0)):
        for schedule in ("random_scan", "two_color"):
            st = fields.gibbs_chains(rows, cols, G, beta, 525, rng, chains=2000,
                                     schedule=schedule, burn=25)
            cfg, law = fields.exact_state_law(rows, cols, G, beta)
            emp = empirical_law(fields.state_codes(st, G), law.size)
            worst = max(worst, tv(emp, law))
    assert worst < 0.02, worst


@invariant("fields")
def color_flip_energy(seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(2, size=(200, 7, 9))
    for nbh in ("four", "eight"):
        np.testing.assert_array_equal(fields.agreements(X, nbh), fields.agreements(1 - X, nbh))
    Y = rng.integers(4, size=(200, 5, 6))
    perm = rng.permutation(4)
    np.testing.assert_array_equal(fields.agreements(Y), fields.agreements(perm[Y]))


@invariant("fields")
def two_color_independent_sites(seed):
    rng = np.random.default_rng(seed)
    for _ in range(20):
        rows, cols = (int(v) for v in rng.integers(1, 12, size=2))
        masks = fields.two_color_masks(rows, cols)
        edges = fields.edge_list(rows, cols, "four")
        total = np.zeros((rows, cols), dtype=int)
        for m in masks:
            flat = m.ravel()
            assert not np.any(flat[edges[:, 0]] & flat[edges[:, 1]])
            total += m
        assert np.all(total == 1)


@invariant("fields")
def partition_color_permutation(seed):
    rng = np.random.default_rng(seed)
    rows, cols, G = 2, 3, 3
    beta = float(rng.uniform(-1, 2))
    cfg, law = fields.exact_state_law(rows, cols, G, beta)
    perm = rng.permutation(G)
    relabeled = fields.state_codes(perm[cfg.astype(int)].reshape(-1, rows, cols), G)
    np.testing.assert_allclose(law[relabeled], law, rtol=1e-12)
    # direct sum over relabeled configurations gives the same log partition
    e = fields.agreements(perm[cfg.astype(int)].reshape(-1, rows, cols))
    np.testing.assert_allclose(special.logsumexp(beta * e), fields.exact_partition(rows, cols, G, beta),
                               rtol=1e-13)
