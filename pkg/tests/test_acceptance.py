"""Acceptance criteria 1 to 17, one PASS/FAIL line each.

Run under pytest (lines are echoed in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate, stats

sys.path.insert(0, str(Path(__file__).parent))

import invariants  # noqa: E402
from bayesdesk import capture, conjugate, dist, fields, mcmc, mixtures, montecarlo, timeseries  # noqa: E402

RESULTS: dict[int, str] = {}


def report(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[number] = line
    print(line)
    assert ok, line


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_criterion_01_darroch_mean():
    post, secs = _timed(lambda: capture.tstage_posterior(2, 45, 50))
    m = post.mean()
    report(1, abs(m - 130.91) <= 0.01 and secs < 1, f"mean {m:.4f} (target 130.91 ± 0.01), {secs:.3f} s")


def test_criterion_02_tag_recovery():
    res, secs = _timed(lambda: capture.tag_recovery_posterior(32, [20, 8, 5, 1, 2, 0, 2, 1, 1, 0], 10_000))
    ok = abs(res.mean - 282.4) <= 0.1 and res.median == 243 and secs < 1
    report(2, ok, f"mean {res.mean:.2f} (target 282.4 ± 0.1), median {res.median} (target 243; "
                  f"{res.median_offset} support points lie below it), {secs:.3f} s")


def test_criterion_03_darroch_mle():
    a = capture.darroch_mle(capture.TwoStageData(20, 30, 5))
    b = capture.darroch_mle(capture.TwoStageData(20, 30, 0))
    report(3, a.value == 120 and a.defined and not b.defined, f"MLE {a.value}, m2=0 defined={b.defined}")


def test_criterion_04_uniform_median():
    got = {}
    for n in (0, 1, 3, 10):
        n0 = max(n, 1)
        # smallest m with Σ_{N=n0}^m n0/(N(N+1)) >= 1/2, in exact arithmetic
        m, cdf = n0, Fraction(0)
        while True:
            cdf += Fraction(n0, m * (m + 1))
            if cdf >= Fraction(1, 2):
                break
            m += 1
        got[n] = (capture.uniform_prior_posterior(n).median, m, 2 * n0 - 1)
    ok = all(a == b == c for a, b, c in got.values())
    report(4, ok, "medians " + ", ".join(f"n+={n}: {v[0]}" for n, v in got.items()))


def test_criterion_05_gprior_determinant():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 21))
        p = int(rng.integers(1, min(5, n - 1) + 1))
        X = rng.normal(size=(n, p))
        for g in (0.5, 1.0, 10.0):
            r = conjugate.gprior_det_identity(X, g)
            worst = max(worst, abs(r.det - r.expected) / r.expected)
    report(5, worst < 1e-8, f"max relative error {worst:.2e} over 300 cases")


def test_criterion_06_beta_binomial_gibbs():
    rng = np.random.default_rng(42)
    tr = mcmc.gibbs_beta_binomial(18, 2.5, 2.5, 100_000, rng)
    th = tr.kept[:, 0]
    # the KS critical value assumes independent draws: thin to negligible autocorrelation
    acf = mcmc.autocorrelation(th, 200)
    lag = int(np.argmax(acf < 0.01))
    sub = th[::lag]
    d = stats.kstest(sub, stats.beta(2.5, 2.5).cdf).statistic
    crit = stats.kstwo.ppf(0.99, sub.size)
    report(6, d < crit, f"KS {d:.4f} < {crit:.4f} on {sub.size} draws (thinned by {lag})")


def test_criterion_07_em_monotone():
    rng = np.random.default_rng(42)
    x = mixtures.simulate_em_dataset(rng, 324)
    worst = math.inf
    for _ in range(20):
        r = mixtures.em_fit(x, mixtures.em_random_start(x, rng), 200)
        if r.loglik.size > 1:
            worst = min(worst, float(np.diff(r.loglik).min()))
    report(7, worst >= -1e-9, f"smallest log-likelihood increment {worst:.3e}")


def test_criterion_08_schur_roots():
    bad, skipped = invariants.schur_disagreements(np.random.default_rng(42), 10_000, 1e-8)
    report(8, bad == 0, f"{bad} disagreements, {skipped} within boundary tolerance")


def test_criterion_09_accept_reject():
    rng = np.random.default_rng(42)
    scale, m_tilde = 3.0, 4.5
    target = stats.beta(2, 2)
    m = m_tilde / scale
    r = montecarlo.accept_reject(lambda x: math.log(scale) + target.logpdf(x), dist.beta(1, 1),
                                 m_tilde, int(100_000 / m), rng)
    c = montecarlo.estimate_normalizing_constant(r)
    per = r.trials / r.draws.size
    se = math.sqrt(m * (m - 1) / r.draws.size)
    ok = abs(c * scale - 1) < 0.05 and abs(per - m) < 3 * se
    report(9, ok, f"constant {c:.5f} (planted {1 / scale:.5f}), trials/draw {per:.4f} (M = {m}, SE {se:.4f}), "
                  f"{r.trials} trials")


def test_criterion_10_abc_exact():
    rng = np.random.default_rng(42)
    props = 66_000
    res = fields.abc_posterior(lambda th, g: g.binomial(5, th), lambda g, k: g.uniform(size=k),
                               lambda d: np.asarray(d).reshape(np.shape(d)[0], -1), 2, 0, props, rng)
    d = stats.kstest(res.accepted, stats.beta(3, 4).cdf).statistic
    crit = stats.kstwo.ppf(0.99, res.accepted.size)
    se = math.sqrt(5 / 36 / props)
    ok = d < crit and abs(res.acceptance_rate - 1 / 6) < 3 * se and res.accepted.size >= 10_000
    report(10, ok, f"KS {d:.4f} < {crit:.4f} on {res.accepted.size} draws, rate {res.acceptance_rate:.5f} "
                   f"(1/6 ± {3 * se:.5f})")


def test_criterion_11_partition_and_gibbs():
    lz = fields.exact_partition(3, 5, 2, 0.0)
    rng = np.random.default_rng(42)
    st = fields.gibbs_chains(1, 2, 2, 1.0, 1010, rng, chains=1000, burn=10)
    emp = invariants.empirical_law(fields.state_codes(st, 2), 4)
    _, exact = fields.exact_state_law(1, 2, 2, 1.0)
    tv = invariants.tv(emp, exact)
    ok = abs(lz - 15 * math.log(2)) <= 1e-12 * lz and tv < 0.01
    report(11, ok, f"log sum {lz!r} vs 15 log 2 = {15 * math.log(2)!r}, TV {tv:.4f} over 10^6 states")


def test_criterion_12_ma_autocovariance():
    rng = np.random.default_rng(42)
    th = rng.uniform(-1, 1, 2)
    n = 1_000_000
    e = rng.standard_normal(n + 2)
    x = e[2:] + th[0] * e[1:-1] + th[1] * e[:-2]
    worst = 0.0
    for s in range(4):
        prod = x[: n - s] * x[s:]
        b = prod[: prod.size // 100 * 100].reshape(100, -1).mean(axis=1)
        se = b.std(ddof=1) / 10
        worst = max(worst, abs(prod.mean() - timeseries.ma_autocovariance(th, 1.0, s)) / se)
    report(12, worst < 3, f"theta {np.round(th, 4).tolist()}, largest deviation {worst:.2f} SE over lags 0..3")


def test_criterion_13_ar_stationary():
    v = timeseries.ar_stationary_covariance(timeseries.companion_matrix([0.5]), 1.0)[0, 0]
    report(13, abs(v - 4 / 3) <= 1e-10, f"variance {float(v)!r}")


def test_criterion_14_forward_filter():
    rng = np.random.default_rng(42)
    spec, init, (P, a, s) = invariants.random_hmm(rng, 2)
    x = rng.normal(size=7)
    got = timeseries.hmm_forward_loglik(spec, x, init).loglik
    ref = invariants.hmm_enumeration_loglik(P, a, s, init, x)
    report(14, abs(got - ref) < 1e-8, f"|Δloglik| = {abs(got - ref):.2e}")


def test_criterion_15_beta_from_ci():
    fit = capture.beta_from_mean_ci(0.4, 0.1, 0.6, 0.9)
    report(15, abs(fit.achieved - 0.9) < 1e-6, f"alpha {fit.alpha_scale:.6f}, coverage {fit.achieved:.10f}")


def test_criterion_16_harmonic_mean():
    off = 0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        x = 100.0 * rng.standard_normal(8)
        tau = dist.sample(montecarlo.precision_posterior(x, 1.0, 1.0), rng, 10_000)
        lh = montecarlo.log_harmonic_mean_evidence(montecarlo.precision_loglik(x, tau))
        le = montecarlo.log_exact_precision_evidence(x, 1.0, 1.0)
        off += abs(lh - le) >= math.log(10)
    rng = np.random.default_rng(42)
    x = rng.normal(0, 2, size=8)
    f = lambda t: math.exp(float(montecarlo.precision_loglik(x, t)) + stats.gamma.logpdf(t, 1.5, scale=1 / 0.7))
    quad = integrate.quad(f, 0, np.inf, epsabs=0, epsrel=1e-12, limit=200)[0]
    rel = abs(montecarlo.exact_precision_evidence(x, 1.5, 0.7) - quad) / quad
    report(16, off >= 8 and rel < 1e-8, f"off by >= 10x in {off}/10 seeds, exact vs quadrature rel. error {rel:.1e}")


def test_criterion_17_invariants():
    failures = []
    names = sorted(invariants.REGISTRY)
    for name in names:
        for seed in invariants.SEEDS:
            try:
                invariants.run(name, seed)
            except AssertionError as e:
                failures.append(f"{name}[{seed}]: {str(e).splitlines()[0][:80]}")
    total = len(names) * len(invariants.SEEDS)
    detail = f"{total - len(failures)}/{total} invariant runs pass ({len(names)} invariants x seeds {invariants.SEEDS})"
    if failures:
        detail += "; " + "; ".join(failures)
    report(17, not failures, detail)


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for t in tests:
        try:
            t()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
