"""Non-Markovian Monte Carlo tools.

Importance sampling with weight diagnostics, harmonic-mean and exact
evidence for the normal-precision model, accept-reject with recovery of
the normalizing constant, a shrinking slice sampler, grid HPD regions and
the Monte Carlo two-sample Bayes factor.  Evidence arithmetic stays in log
space throughout.

Callables named ``log_target_unnorm`` / ``log_proposal`` must accept a
NumPy array and return an array of the same shape.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import special

from . import dist
from .dist import ScalarDistribution
from .errors import (BoundError, DegenerateSampleError, ParameterError,
                     SupportError)

LogDensity = Callable[[np.ndarray], np.ndarray]


# Importance sampling -----------------------------------------------------

class WeightedSample(NamedTuple):
    points: np.ndarray
    log_weights: np.ndarray


class ImportanceResult(NamedTuple):
    estimate: float
    ess: float
    max_weight_share: float


def importance_weights(points, log_target_unnorm: LogDensity, log_proposal: LogDensity) -> WeightedSample:
    """Log importance ratios log f(x) - log g(x) at the proposal draws."""
    x = np.asarray(points, dtype=float)
    lw = np.asarray(log_target_unnorm(x), dtype=float) - np.asarray(log_proposal(x), dtype=float)
    return WeightedSample(x, np.where(np.isnan(lw), -np.inf, lw))


def importance_estimate(h: Callable, log_target_unnorm: LogDensity | None,
                        log_proposal: LogDensity | None, sample) -> ImportanceResult:
    """Self-normalized importance sampling estimate of E_f[h(X)].

    ``sample`` is either a :class:`WeightedSample` or raw proposal draws.
    When both densities are given the weights are computed from them,
    otherwise the weights carried by ``sample`` are used.  Heavy-tailed
    weights are reported through ``ess`` and ``max_weight_share`` rather
    than rejected.
    """
    if log_target_unnorm is not None and log_proposal is not None:
        pts = sample.points if isinstance(sample, WeightedSample) else sample
        sample = importance_weights(pts, log_target_unnorm, log_proposal)
    elif not isinstance(sample, WeightedSample):
        raise ParameterError("raw points need both target and proposal densities")
    lw = np.asarray(sample.log_weights, dtype=float)
    if lw.size == 0 or not np.isfinite(lw.max(initial=-np.inf)):
        raise DegenerateSampleError("all importance weights are zero")
    w = np.exp(lw - lw.max())
    total = w.sum()
    hx = np.asarray(h(sample.points), dtype=float)
    estimate = float(np.sum(w * hx) / total)
    return ImportanceResult(estimate, float(total**2 / np.sum(w * w)), float(w.max() / total))


# Evidence ----------------------------------------------------------------

def log_harmonic_mean_evidence(log_likelihoods: Sequence[float]) -> float:
    """log of N / Σ_j 1/ℓ_j."""
    ll = np.asarray(log_likelihoods, dtype=float)
    if ll.size == 0:
        raise ParameterError("need at least one log-likelihood value")
    return float(math.log(ll.size) - special.logsumexp(-ll))


def harmonic_mean_evidence(log_likelihoods: Sequence[float]) -> float:
    """Harmonic-mean evidence estimate from likelihoods at posterior draws."""
    return math.exp(log_harmonic_mean_evidence(log_likelihoods))


def log_exact_precision_evidence(data: Sequence[float], prior_shape: float, prior_rate: float) -> float:
    """log m(x) for x_i ~ N(0, 1/τ) iid with τ ~ G(prior_shape, prior_rate)."""
    if not (prior_shape > 0 and prior_rate > 0):
        raise ParameterError("prior shape and rate must be positive")
    x = np.asarray(data, dtype=float)
    n = x.size
    a_post = prior_shape + n / 2
    b_post = prior_rate + 0.5 * float(np.sum(x * x))
    return float(-0.5 * n * math.log(2 * math.pi)
                 + special.gammaln(a_post) - a_post * math.log(b_post)
                 + prior_shape * math.log(prior_rate) - special.gammaln(prior_shape))


def exact_precision_evidence(data: Sequence[float], prior_shape: float, prior_rate: float) -> float:
    """Closed-form evidence of the normal-precision model (1 for empty data)."""
    return math.exp(log_exact_precision_evidence(data, prior_shape, prior_rate))


def precision_loglik(data: Sequence[float], tau) -> np.ndarray:
    """Log-likelihood of x_i ~ N(0, 1/τ) at each τ."""
    x = np.asarray(data, dtype=float)
    tau = np.asarray(tau, dtype=float)
    return 0.5 * x.size * np.log(tau / (2 * np.pi)) - 0.5 * tau * float(np.sum(x * x))


def precision_posterior(data: Sequence[float], prior_shape: float, prior_rate: float) -> ScalarDistribution:
    x = np.asarray(data, dtype=float)
    return dist.gamma(prior_shape + x.size / 2, prior_rate + 0.5 * float(np.sum(x * x)))


# Accept-reject -----------------------------------------------------------

class ArReport(NamedTuple):
    draws: np.ndarray
    trials: int
    m_tilde: float

    @property
    def acceptance_rate(self) -> float:
        return self.draws.size / self.trials if self.trials else 0.0


_BOUND_TOL = 1e-9


def accept_reject(log_target_unnorm: LogDensity, proposal: ScalarDistribution, m_tilde: float,
                  count: int, rng: np.random.Generator, *, block: int = 4096,
                  max_trials: int | None = None) -> ArReport:
    """Draw ``count`` values from f̃ with the envelope f̃ <= m_tilde · g.

    Proposals are generated in blocks; only trials up to the ``count``-th
    acceptance are charged.  A proposal with f̃/(m_tilde g) > 1 raises
    :class:`BoundError` carrying the offending point.
    """
    if not m_tilde > 0:
        raise ParameterError("m_tilde must be positive")
    if count < 0:
        raise ParameterError("count must be nonnegative")
    log_m = math.log(m_tilde)
    draws: list[np.ndarray] = []
    accepted = trials = 0
    while accepted < count:
        if max_trials is not None and trials >= max_trials:
            raise DegenerateSampleError(f"only {accepted} acceptances in {trials} trials")
        x = np.asarray(dist.sample(proposal, rng, block), dtype=float)
        u = rng.random(block)
        log_ratio = np.asarray(log_target_unnorm(x), dtype=float) - log_m - dist.log_pdf(proposal, x)
        bad = log_ratio > _BOUND_TOL
        if bad.any():
            i = int(np.argmax(bad))
            raise BoundError(float(x[i]), float(np.exp(log_ratio[i])))
        ok = np.log(u) < log_ratio
        idx = np.flatnonzero(ok)
        need = count - accepted
        if idx.size >= need:
            last = idx[need - 1]
            draws.append(x[idx[:need]])
            trials += int(last) + 1
            accepted = count
        else:
            draws.append(x[idx])
            trials += block
            accepted += idx.size
    out = np.concatenate(draws) if draws else np.empty(0)
    return ArReport(out, trials, float(m_tilde))


def estimate_normalizing_constant(report: ArReport) -> float:
    """1/(ϱ̂ M̃): the constant c such that c·f̃ is a probability density."""
    if report.trials <= 0:
        raise ParameterError("no trials recorded")
    if report.draws.size == 0:
        raise DegenerateSampleError("no accepted draws")
    return 1.0 / (report.acceptance_rate * report.m_tilde)


# Slice sampler -----------------------------------------------------------

def slice_sampler_step(log_target_unnorm: LogDensity, x, rng: np.random.Generator,
                       bracket: tuple[float, float], *, return_level: bool = False,
                       max_shrink: int = 200):
    """One slice-sampler move from ``x`` (scalar or array of independent states).

    Draws the level log u = log f̃(x) + log U, then samples uniformly on the
    bracket, shrinking the bracket towards ``x`` after each rejected point.
    """
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise ParameterError("bracket must be an increasing pair")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x).copy()
    if np.any((x < lo) | (x > hi)):
        raise ParameterError("current state lies outside the bracket")
    fx = np.asarray(log_target_unnorm(x), dtype=float)
    if not np.all(np.isfinite(fx)):
        raise ParameterError("log target must be finite at the current state")
    log_u = fx + np.log(rng.random(x.size))
    left = np.full(x.size, lo)
    right = np.full(x.size, hi)
    out = np.empty_like(x)
    todo = np.arange(x.size)
    for _ in range(max_shrink):
        cand = left[todo] + (right[todo] - left[todo]) * rng.random(todo.size)
        ok = np.asarray(log_target_unnorm(cand), dtype=float) >= log_u[todo]
        out[todo[ok]] = cand[ok]
        rej, cand = todo[~ok], cand[~ok]
        below = cand < x[rej]
        left[rej[below]] = cand[below]
        right[rej[~below]] = cand[~below]
        todo = rej
        if todo.size == 0:
            break
    else:
        raise SupportError("bracket shrinkage failed to hit the level set")
    res = out[0] if scalar else out
    if return_level:
        return res, (log_u[0] if scalar else log_u)
    return res


def slice_sampler(log_target_unnorm: LogDensity, x0, iters: int, rng: np.random.Generator,
                  bracket: tuple[float, float]) -> np.ndarray:
    """Run ``iters`` slice steps from ``x0`` and return the path."""
    out = np.empty(iters)
    x = float(x0)
    for t in range(iters):
        x = float(slice_sampler_step(log_target_unnorm, x, rng, bracket))
        out[t] = x
    return out


# Grid HPD ----------------------------------------------------------------

class HpdRegion(NamedTuple):
    level: float  # unnormalized density threshold
    region_mass: float  # normalized trapezoid mass of the region
    region: list[tuple[float, float]]


def hpd_from_grid(log_target_unnorm: LogDensity, grid, alpha: float, *,
                  boundary_tol: float = 1e-12) -> HpdRegion:
    """Smallest super-level set of f̃ on ``grid`` with trapezoid mass >= alpha.

    Grid points with density equal to the threshold belong to the region.
    A segment contributes its trapezoid area only when both end points are
    in the region, so the reported mass is conservative by at most one
    segment per interval end.
    """
    if not 0 < alpha < 1:
        raise ParameterError("alpha must lie in (0, 1)")
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < 3 or np.any(np.diff(g) <= 0):
        raise ParameterError("grid must be strictly ascending with at least 3 points")
    lf = np.asarray(log_target_unnorm(g), dtype=float)
    f = np.exp(lf - lf.max())
    if max(f[0], f[-1]) > boundary_tol:
        raise SupportError("density at the grid boundary is not negligible; widen the grid")
    seg = 0.5 * (f[:-1] + f[1:]) * np.diff(g)
    total = seg.sum()
    seg_level = np.minimum(f[:-1], f[1:])  # a segment is kept iff level <= this

    order = np.argsort(seg_level)[::-1]
    cum = np.cumsum(seg[order]) / total
    k = int(np.searchsorted(cum, alpha))
    k = min(k, order.size - 1)
    level = float(seg_level[order[k]])
    inside = f >= level
    mass = float(seg[seg_level >= level].sum() / total)

    region = []
    idx = np.flatnonzero(inside)
    if idx.size:
        breaks = np.flatnonzero(np.diff(idx) > 1)
        starts = np.r_[idx[0], idx[breaks + 1]]
        ends = np.r_[idx[breaks], idx[-1]]
        region = [(float(g[s]), float(g[e])) for s, e in zip(starts, ends)]
    return HpdRegion(level * math.exp(lf.max()), mass, region)


def cauchy_posterior_log_unnorm(data: Sequence[float], prior_var: float = 10.0) -> LogDensity:
    """log of exp(-μ²/(2 prior_var)) / ∏(1 + (x_i - μ)²), Cauchy sample with normal prior."""
    x = np.asarray(data, dtype=float)

    def logf(mu):
        mu = np.asarray(mu, dtype=float)
        return -mu**2 / (2 * prior_var) - np.sum(np.log1p((x[:, None] - mu.ravel()) ** 2), axis=0).reshape(mu.shape)

    return logf


# Monte Carlo Bayes factor ------------------------------------------------

def bayes_factor_mc_two_sample(xbar: float, ybar: float, s2_xy: float, n: int, tau: float,
                               n_sims: int, rng: np.random.Generator) -> float:
    """Monte Carlo B21 with ξ_i ~ N(0, τ²):

    mean_i [(2ξ_i + x̄ - ȳ)² + 2 s²]^{-n+1/2} / [(x̄ - ȳ)² + 2 s²]^{-n+1/2}.
    """
    if not tau > 0:
        raise ParameterError("tau must be positive")
    if n_sims < 1:
        raise ParameterError("n_sims must be at least 1")
    d = xbar - ybar
    xi = tau * rng.standard_normal(n_sims)
    e = -n + 0.5
    log_num = special.logsumexp(e * np.log((2 * xi + d) ** 2 + 2 * s2_xy)) - math.log(n_sims)
    return float(math.exp(log_num - e * math.log(d * d + 2 * s2_xy)))
