"""Capture-recapture inference on a closed or open population.

Discrete posteriors over the population size N are computed by exact
log-space summation; factorial ratios always go through log-Γ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import optimize, special, stats

from . import dist
from .errors import ParameterError, SupportError
from .mcmc import Trace, default_warmup

TAIL_TOL = 1e-8
MAX_SUPPORT = 2**23


def _lfact(n):
    return special.gammaln(np.asarray(n, dtype=float) + 1.0)


# Discrete posteriors -----------------------------------------------------

@dataclass(frozen=True)
class DiscretePosterior:
    """Normalized law on N = support_min, ..., support_min + len(log_mass) - 1.

    ``log_normalizer`` is the log of the sum of the unnormalized masses and
    ``tail_bound`` the estimated mass beyond the truncation point.
    """

    support_min: int
    log_mass: np.ndarray
    log_normalizer: float
    tail_bound: float

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.support_min, self.support_min + self.log_mass.size)

    @property
    def support_max(self) -> int:
        return self.support_min + self.log_mass.size - 1

    @property
    def mass(self) -> np.ndarray:
        return np.exp(self.log_mass)

    def pmf(self, N) -> np.ndarray:
        N = np.asarray(N)
        idx = N - self.support_min
        ok = (idx >= 0) & (idx < self.log_mass.size)
        return np.where(ok, np.exp(self.log_mass[np.clip(idx, 0, self.log_mass.size - 1)]), 0.0)

    def cdf(self, m: int) -> float:
        if m < self.support_min:
            return 0.0
        return float(np.sum(self.mass[: m - self.support_min + 1]))

    def mean(self) -> float:
        return float(self.mass @ self.support)

    def median(self) -> int:
        """Smallest m with P(N <= m) >= 1/2."""
        return int(self.support_min + self.median_offset())

    def median_offset(self) -> int:
        """Number of support points whose cumulative mass stays below 1/2."""
        return int(np.sum(np.cumsum(self.mass) < 0.5))

    def mode(self) -> int:
        return int(self.support_min + np.argmax(self.log_mass))


def _local_decay(lm, N):
    # power-law decay exponent of the mass near the truncation point
    j = max(0, int(0.9 * (len(N) - 1)))
    if j == len(N) - 1 or not np.isfinite(lm[j]) or not np.isfinite(lm[-1]):
        return math.inf
    return -(lm[-1] - lm[j]) / math.log(N[-1] / N[j])


def _finalize(lm, N):
    logz = float(special.logsumexp(lm))
    s = _local_decay(lm, N)
    if s <= 1:
        tail = math.inf
    else:
        tail = float(math.exp(lm[-1] - logz) * N[-1] / (s - 1))
    return DiscretePosterior(int(N[0]), lm - logz, logz, tail)


def discrete_posterior(log_unnorm: Callable[[np.ndarray], np.ndarray], support_min: int,
                       support_max: int | None = None, start: int = 64) -> DiscretePosterior:
    """Normalize ``log_unnorm`` on support_min..support_max.

    Without ``support_max`` the range doubles from ``start`` until the
    estimated tail mass drops below 1e-8; with it, a larger tail raises
    :class:`SupportError`.
    """
    lo = int(support_min)
    if support_max is not None:
        if support_max < lo:
            raise ParameterError("support_max below the support minimum")
        N = np.arange(lo, int(support_max) + 1)
        post = _finalize(np.asarray(log_unnorm(N), dtype=float), N)
        if not post.tail_bound < TAIL_TOL:
            raise SupportError(f"tail mass beyond {support_max} estimated at {post.tail_bound:.3g}; "
                               f"increase support_max")
        return post
    hi = max(lo + 1, int(start))
    while True:
        N = np.arange(lo, hi + 1)
        post = _finalize(np.asarray(log_unnorm(N), dtype=float), N)
        if post.tail_bound < TAIL_TOL:
            return post
        if hi >= MAX_SUPPORT:
            raise SupportError(f"tail mass still {post.tail_bound:.3g} at N = {hi}; "
                               "the posterior may be improper or too heavy-tailed")
        hi = min(2 * hi, MAX_SUPPORT)


class UniformCapturePosterior(NamedTuple):
    """π(N | n⁺) ∝ 1/(N(N+1)) on N >= n⁺ ∨ 1; the mean is infinite."""

    support_min: int
    normalizer: int
    median: int
    mean: float

    def pmf(self, N):
        N = np.asarray(N, dtype=float)
        return np.where(N >= self.support_min, self.normalizer / (N * (N + 1)), 0.0)

    def cdf(self, m) -> float:
        if m < self.support_min:
            return 0.0
        return 1.0 - self.normalizer / (m + 1)


def uniform_prior_posterior(n_plus: int) -> UniformCapturePosterior:
    """Single-stage posterior under π(N) ∝ 1/N.

    The masses telescope, so the normalizer is n⁺ ∨ 1 and the CDF at m is
    1 - (n⁺ ∨ 1)/(m + 1); the median is therefore 2(n⁺ ∨ 1) - 1.
    """
    if n_plus < 0:
        raise ParameterError("n_plus must be nonnegative")
    n0 = max(int(n_plus), 1)
    return UniformCapturePosterior(n0, n0, 2 * n0 - 1, math.inf)


# Tag recovery ------------------------------------------------------------

class TagRecoveryResult(NamedTuple):
    posterior: DiscretePosterior
    mean: float
    median: int
    median_offset: int
    crude_estimate: float


def tag_recovery_log_mass(n1_plus: int, recaptures: Sequence[int],
                          exponent: str = "displayed") -> Callable[[np.ndarray], np.ndarray]:
    """Unnormalized log mass of N for :func:`tag_recovery_posterior`."""
    rec = np.asarray(recaptures, dtype=int)
    if n1_plus < 0 or np.any(rec < 0) or np.any(rec > n1_plus):
        raise ParameterError("recaptures must lie in 0..n1_plus")
    if exponent not in ("displayed", "exact"):
        raise ParameterError("exponent must be 'displayed' or 'exact'")
    k = 1 + rec.size
    ndot = n1_plus + int(rec.sum())
    c = (k if exponent == "displayed" else k - 1) * n1_plus

    def logf(N):
        return _lfact(N - 1) - _lfact(N - n1_plus) + _lfact(N + c - ndot) - _lfact(N + c + 1)
    return logf


def tag_recovery_posterior(n1_plus: int, recaptures: Sequence[int], support_max: int | None = None,
                           exponent: str = "displayed") -> TagRecoveryResult:
    """Posterior of N when n1⁺ ~ B(N, p) and later recaptures are B(n1⁺, p).

    With k = 1 + len(recaptures) rounds and n. the total count, the mass is
    (N-1)!/(N-n1⁺)! · (N+c-n.)!/(N+c+1)! with c = k n1⁺ (``"displayed"``)
    or the exact Beta-integral value c = (k-1) n1⁺ (``"exact"``).
    ``median_offset`` counts support points below the median, and
    ``crude_estimate`` is n1⁺/p̂ with p̂ = Σ recaptures / ((k-1) n1⁺).
    """
    logf = tag_recovery_log_mass(n1_plus, recaptures, exponent)
    rec = np.asarray(recaptures, dtype=int)
    post = discrete_posterior(logf, max(n1_plus, 1), support_max, start=4 * max(n1_plus, 16))
    crude = n1_plus / (rec.sum() / (rec.size * n1_plus)) if rec.size and rec.sum() > 0 else math.inf
    return TagRecoveryResult(post, post.mean(), post.median(), post.median_offset(), float(crude))


# Two-stage (Darroch) model -----------------------------------------------

@dataclass(frozen=True)
class TwoStageData:
    n1: int
    n2: int
    m2: int

    def __post_init__(self):
        if min(self.n1, self.n2, self.m2) < 0 or self.m2 > min(self.n1, self.n2):
            raise ParameterError("need 0 <= m2 <= min(n1, n2)")

    @property
    def n_plus(self) -> int:
        return self.n1 + self.n2 - self.m2

    @property
    def n_c(self) -> int:
        return self.n1 + self.n2


def hypergeometric_recapture(N: int, n1: int, n2: int):
    """Law of m2 given n1 and n2 marked/caught out of N; returns (support, pmf, mean n1 n2/N)."""
    if not (0 <= n1 <= N and 0 <= n2 <= N):
        raise ParameterError("need 0 <= n1, n2 <= N")
    m = np.arange(max(0, n1 + n2 - N), min(n1, n2) + 1)
    return m, stats.hypergeom.pmf(m, N, n1, n2), n1 * n2 / N


def _tstage_log_mass(T, n_plus, n_c):
    def logf(N):
        N = np.asarray(N)
        with np.errstate(invalid="ignore"):
            v = _lfact(N - 1) - _lfact(N - n_plus) + _lfact(T * N - n_c) - _lfact(T * N + 1)
        return np.where(T * N >= n_c, v, -np.inf)
    return logf


def tstage_posterior(T: int, n_plus: int, n_c: int, support_max: int | None = None) -> DiscretePosterior:
    """π(N | n⁺, n^c) ∝ (N-1)!/(N-n⁺)! (TN-n^c)!/(TN+1)! on N >= n⁺ ∨ 1, prior 1/N."""
    if T < 1 or n_plus < 0 or n_c < n_plus:
        raise ParameterError("need T >= 1 and 0 <= n_plus <= n_c")
    return discrete_posterior(_tstage_log_mass(T, n_plus, n_c), max(n_plus, 1), support_max,
                              start=4 * max(n_plus, 16))


def darroch_posterior(data: TwoStageData, support_max: int | None = None) -> DiscretePosterior:
    """Darroch posterior under π(N) = 1/N (the T = 2 case of :func:`tstage_posterior`)."""
    return tstage_posterior(2, data.n_plus, data.n_c, support_max)


def darroch_log_likelihood(data: TwoStageData, N) -> np.ndarray:
    """Hypergeometric log-likelihood of m2 up to a constant.

    log[(N-n1)! (N-n2)! / ((N-n⁺)! N!)] for N >= n⁺, -inf otherwise.
    """
    N = np.asarray(N)
    with np.errstate(invalid="ignore"):
        v = _lfact(N - data.n1) + _lfact(N - data.n2) - _lfact(N - data.n_plus) - _lfact(N)
    return np.where(N >= data.n_plus, v, -np.inf)


class DarrochMle(NamedTuple):
    value: int | None
    defined: bool


def darroch_mle(data: TwoStageData) -> DarrochMle:
    """Floor or ceiling of n1 n2 / m2, whichever has the larger likelihood.

    Undefined when m2 = 0.  Ties (the likelihood ratio equals one at an
    integer n1 n2 / m2) resolve to the floor.
    """
    if data.m2 == 0:
        return DarrochMle(None, False)
    r = data.n1 * data.n2 / data.m2
    cands = np.unique(np.maximum([math.floor(r), math.ceil(r)], data.n_plus))
    ll = darroch_log_likelihood(data, cands)
    return DarrochMle(int(cands[np.argmax(ll)]), True)


def twostage_poisson_posterior(data: TwoStageData, lam: float,
                               support_max: int | None = None) -> DiscretePosterior:
    """Exact marginal of N under a P(λ) prior: ∝ λ^N/(N-n⁺)! B(n^c+1, 2N-n^c+1)."""
    if not lam > 0:
        raise ParameterError("lambda must be positive")

    def logf(N):
        N = np.asarray(N, dtype=float)
        return (N * math.log(lam) - _lfact(N - data.n_plus)
                + special.betaln(data.n_c + 1, 2 * N - data.n_c + 1))
    return discrete_posterior(logf, data.n_plus, support_max, start=max(64, int(4 * lam), 4 * data.n_plus))


def _tstage_log_mass_scalar(T, n_plus, n_c, N):
    lg = math.lgamma
    return lg(N) - lg(N - n_plus + 1) + lg(T * N - n_c + 1) - lg(T * N + 2)


def _poisson_logpmf(k, mu):
    if mu <= 0:
        return 0.0 if k == 0 else -math.inf
    return k * math.log(mu) - mu - math.lgamma(k + 1)


def tstage_log_acceptance(T: int, n_plus: int, n_c: int, N: int, prop: int, p: float,
                          target: str = "conditional") -> float:
    """Log MH ratio for moving N -> prop with the shifted-Poisson proposal.

    ``conditional`` targets π(N | p, data) ∝ (N-1)!/(N-n⁺)! (1-p)^{TN}, which
    makes the step a valid Metropolis-within-Gibbs move.  ``marginal`` uses
    the marginal π(N | data) instead; with a proposal that depends on the
    current p this leaves a biased chain and is kept for comparison only.
    """
    if prop < max(n_plus, 1) or T * prop < n_c:
        return -math.inf
    s = (1.0 - p) ** T
    if target == "conditional":
        lg = math.lgamma
        ratio = (lg(prop) - lg(prop - n_plus + 1) - lg(N) + lg(N - n_plus + 1)
                 + T * (prop - N) * math.log1p(-p))
    elif target == "marginal":
        ratio = _tstage_log_mass_scalar(T, n_plus, n_c, prop) - _tstage_log_mass_scalar(T, n_plus, n_c, N)
    else:
        raise ParameterError("target must be 'conditional' or 'marginal'")
    return ratio + _poisson_logpmf(N - n_plus, prop * s) - _poisson_logpmf(prop - n_plus, N * s)


def tstage_mh_posterior(T: int, n_plus: int, n_c: int, iters: int, rng: np.random.Generator,
                        warmup: int | None = None, target: str = "conditional") -> Trace:
    """MH-within-Gibbs for (N, p) under π(N, p) ∝ 1/N.

    N* = n⁺ + P(N(1-p)^T) is accepted or rejected (see
    :func:`tstage_log_acceptance` for ``target``), then
    p ~ Be(n^c+1, TN-n^c+1).  The chain starts at N = 2n⁺.
    """
    if T < 1 or n_plus < 0 or n_c < n_plus or iters < 1:
        raise ParameterError("need T >= 1, 0 <= n_plus <= n_c and iters >= 1")
    N = max(2 * n_plus, 1)
    while T * N < n_c:
        N += 1
    p = rng.beta(n_c + 1, T * N - n_c + 1)
    out = np.empty((iters, 2))
    out[0] = N, p
    acc = np.zeros(iters, dtype=bool)
    for i in range(1, iters):
        prop = n_plus + int(rng.poisson(N * (1 - p) ** T))
        if math.log(rng.random()) < tstage_log_acceptance(T, n_plus, n_c, N, prop, p, target):
            acc[i] = prop != N
            N = prop
        p = rng.beta(n_c + 1, T * N - n_c + 1)
        out[i] = N, p
    return Trace(out, acc, default_warmup(iters) if warmup is None else warmup, ("N", "p"))


def twostage_gibbs(data: TwoStageData, iters: int, rng: np.random.Generator,
                   prior: str = "poisson", lam: float | None = None,
                   warmup: int | None = None) -> Trace:
    """Gibbs sampler for (N, p) in the two-stage model.

    With ``prior='poisson'`` the blocks are exact: p | N ~ Be(n^c+1, 2N-n^c+1)
    and N - n⁺ | p ~ P(λ(1-p)²).  With ``prior='one_over_n'`` the N-step is
    the shifted-Poisson MH move of :func:`tstage_mh_posterior` with T = 2.
    """
    if prior == "one_over_n":
        return tstage_mh_posterior(2, data.n_plus, data.n_c, iters, rng, warmup)
    if prior != "poisson":
        raise ParameterError("prior must be 'poisson' or 'one_over_n'")
    if lam is None or not lam > 0:
        raise ParameterError("the Poisson prior needs lambda > 0")
    N = max(data.n_plus, int(lam))
    out = np.empty((iters, 2))
    for i in range(iters):
        p = rng.beta(data.n_c + 1, 2 * N - data.n_c + 1)
        N = data.n_plus + int(rng.poisson(lam * (1 - p) ** 2))
        out[i] = N, p
    return Trace(out, None, default_warmup(iters) if warmup is None else warmup, ("N", "p"))


# T-stage model with trap dependence --------------------------------------

class TStageStats(NamedTuple):
    n1: int
    n_plus: int
    n_star: int
    m_plus: int


def tstage_sufficient_stats(captures: Sequence[int], recaptures: Sequence[int], T: int) -> TStageStats:
    """(n1, n⁺, n*, m⁺) with n* = T n1 + Σ_{j=2}^T (T-j+1)(n_j - m_j).

    The likelihood is then ∝ N!/(N-n⁺)! p^{n⁺}(1-p)^{TN-n*} q^{m⁺}(1-q)^{n*-n⁺-m⁺},
    since marked animals face n* - n⁺ recapture trials in total.
    """
    n = np.asarray(captures, dtype=int)
    m = np.asarray(recaptures, dtype=int)
    if n.size != T or m.size != T - 1:
        raise ParameterError("need T captures and T-1 recaptures")
    if np.any(m < 0) or np.any(m > n[1:]):
        raise ParameterError("recaptures must lie in 0..n_j")
    new = n[1:] - m
    j = np.arange(2, T + 1)
    return TStageStats(int(n[0]), int(n[0] + new.sum()), int(T * n[0] + np.sum((T - j + 1) * new)),
                       int(m.sum()))


# Mark loss ---------------------------------------------------------------

def twostage_log_likelihood(N: int, p: float, n1: int, n2: int, m2: int) -> float:
    """B(n1; N, p) B(m2; n1, p) B(n2 - m2; N - n1, p), on the log scale."""
    return float(stats.binom.logpmf(n1, N, p) + stats.binom.logpmf(m2, n1, p)
                 + stats.binom.logpmf(n2 - m2, N - n1, p))


def markloss_z_range(N: int, n1: int, n2: int, m2: int, k: int) -> range:
    """Feasible counts z of lost marks: max(k, n1+n2-m2-N, 0) <= z <= n1 - m2."""
    return range(max(k, n1 + n2 - m2 - N, 0), n1 - m2 + 1)


def markloss_log_likelihood(N: int, p: float, q: float, r: float, n1: int, n2: int, m2: int,
                            k: int) -> float:
    """Observed log-likelihood with mark loss, summing the completed likelihood over z.

    z ~ B(n1, q) marks are lost and k ~ B(z, r) of them are recovered; at the
    second visit m2 ~ B(n1 - z, p) and n2 - m2 ~ B(N - n1 + z, p).
    """
    if min(N, n1, n2, m2, k) < 0 or n1 > N:
        raise ParameterError("counts must be nonnegative with n1 <= N")
    zr = np.arange(markloss_z_range(N, n1, n2, m2, k).start, n1 - m2 + 1)
    if zr.size == 0:
        return -math.inf
    with np.errstate(divide="ignore"):
        terms = (stats.binom.logpmf(n1, N, p) + stats.binom.logpmf(zr, n1, q)
                 + stats.binom.logpmf(k, zr, r) + stats.binom.logpmf(m2, n1 - zr, p)
                 + stats.binom.logpmf(n2 - m2, N - n1 + zr, p))
    return float(special.logsumexp(terms))


# Open population ---------------------------------------------------------

@dataclass(frozen=True)
class OpenPopData:
    n1: int
    c2: int
    c3: int
    r2: int = 0

    def __post_init__(self):
        if min(self.n1, self.c2, self.c3, self.r2) < 0:
            raise ParameterError("counts must be nonnegative")
        if self.r1_max("full_conditional") < 0:
            raise ParameterError("infeasible counts: no admissible r1")

    def r1_max(self, method: str = "full_conditional") -> int:
        if method == "marginalized":
            return min(self.n1 - self.c2, self.n1 - self.c3)
        return min(self.n1 - self.r2 - self.c3, self.n1 - self.c2)


def openpop_r1_log_pmf(data: OpenPopData, p: float, q: float, method: str = "full_conditional"):
    """Normalized log-pmf of r1 over 0..r1_max; returns (support, log_pmf).

    full_conditional: C(n1-c2, r1) C(n1-r1, r2+c3) {q/((1-q)²(1-p)²)}^r1.
    marginalized: (n1-r1)!/(r1!(n1-r1-c2)!(n1-r1-c3)!)
    {q/((1-p)(1-q)[q+(1-p)(1-q)])}^r1, with r2 summed out of the joint.
    """
    if not (0 <= p < 1 and 0 <= q < 1):
        raise ParameterError("need p, q in [0, 1)")
    n1, c2, c3, r2 = data.n1, data.c2, data.c3, data.r2
    if method == "marginalized":
        r1 = np.arange(data.r1_max(method) + 1)
        rho = q / ((1 - p) * (1 - q) * (q + (1 - p) * (1 - q)))
        lw = (_lfact(n1 - r1) - _lfact(n1 - r1 - c3) - _lfact(r1) - _lfact(n1 - r1 - c2))
    elif method in ("full_conditional", "accept_reject"):
        r1 = np.arange(data.r1_max() + 1)
        rho = q / ((1 - q) ** 2 * (1 - p) ** 2)
        lw = (special.gammaln(n1 - c2 + 1) - _lfact(r1) - _lfact(n1 - c2 - r1)
              + _lfact(n1 - r1) - _lfact(r2 + c3) - _lfact(n1 - r1 - r2 - c3))
    else:
        raise ParameterError("method must be full_conditional, marginalized or accept_reject")
    with np.errstate(divide="ignore"):
        lw = lw + special.xlogy(r1, rho)
    return r1, lw - special.logsumexp(lw)


class R1Draws(NamedTuple):
    values: np.ndarray
    acceptance_rate: float | None


def openpop_r1_sampler(data: OpenPopData, p: float, q: float, method: str,
                       rng: np.random.Generator, size: int = 1, q2: float | None = None) -> R1Draws:
    """Draw r1 from its conditional posterior.

    ``accept_reject`` proposes from B(r1_max, q2) and
    accepts with probability f(y)/(M g(y)), where the bound M is recomputed
    as the exact maximum of f/g over the support.  By default q2 matches the
    proposal mean to the target mean.  The acceptance rate is accepted draws
    over proposals.
    """
    support, lp = openpop_r1_log_pmf(data, p, q, method)
    if method != "accept_reject":
        return R1Draws(rng.choice(support, size=size, p=np.exp(lp)), None)
    barr = int(support[-1])
    if q2 is None:
        # match the proposal mean to the target mean
        q2 = float(np.clip(np.exp(lp) @ support / max(barr, 1), 1e-6, 1 - 1e-6))
    lg = stats.binom.logpmf(support, barr, q2)
    live = np.isfinite(lp)
    if np.any(live & ~np.isfinite(lg)):
        raise ParameterError("proposal puts no mass on part of the target support")
    log_m = float(np.max(lp[live] - lg[live]))
    out = np.empty(size, dtype=int)
    filled = trials = 0
    while filled < size:
        need = size - filled
        # each proposal is accepted with probability 1/M
        batch = int(min(need * math.exp(log_m) * 1.2 + 16, 1 << 22))
        y = rng.binomial(barr, q2, size=batch)
        ok = np.log(rng.random(y.size)) <= lp[y] - lg[y] - log_m
        idx = np.flatnonzero(ok)
        if idx.size >= need:
            trials += int(idx[need - 1]) + 1
            out[filled:] = y[idx[:need]]
            filled = size
        else:
            trials += y.size
            out[filled:filled + idx.size] = y[idx]
            filled += idx.size
    return R1Draws(out, size / trials)


# Beta elicitation --------------------------------------------------------

class BetaFit(NamedTuple):
    alpha_scale: float
    achieved: float
    distribution: dist.ScalarDistribution


def beta_coverage(alpha_scale: float, mean: float, lo: float, hi: float) -> float:
    """Mass of (lo, hi) under Be(α m, α(1-m))."""
    a, b = alpha_scale * mean, alpha_scale * (1 - mean)
    return float(special.betainc(a, b, hi) - special.betainc(a, b, lo))


def beta_from_mean_ci(mean: float, lo: float, hi: float, coverage: float,
                      bracket=(1e-8, 1e8)) -> BetaFit:
    """Find α with Be(α m, α(1-m)) giving (lo, hi) the requested coverage.

    Coverage tends to 0 as α -> 0 and to 1 as α -> ∞, so a root exists; it
    is located by bracketed root finding on log α.
    """
    if not 0 < lo < mean < hi < 1:
        raise ParameterError("need 0 < lo < mean < hi < 1")
    if not 0 < coverage < 1:
        raise ParameterError("coverage must lie in (0, 1)")

    def g(la):
        return beta_coverage(math.exp(la), mean, lo, hi) - coverage

    a, b = math.log(bracket[0]), math.log(bracket[1])
    if g(a) > 0 or g(b) < 0:
        raise ParameterError("coverage not reachable on the search bracket")
    la = optimize.brentq(g, a, b, xtol=1e-14, rtol=1e-14, maxiter=500)
    alpha = math.exp(la)
    return BetaFit(alpha, beta_coverage(alpha, mean, lo, hi), dist.beta(alpha * mean, alpha * (1 - mean)))
