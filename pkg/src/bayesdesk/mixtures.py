"""Two-component normal mixtures: EM, Gibbs samplers, allocation weights.

Allocations are coded 1 and 2 throughout, with p the weight of component 1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special

from .errors import ParameterError
from .mcmc import Trace, default_warmup

COLLAPSE_TOL = 1e-12
_LOG_2PI = math.log(2 * math.pi)


@dataclass(frozen=True)
class MixtureParams:
    """p N(mu[0], sigma2[0]) + (1-p) N(mu[1], sigma2[1])."""

    p: float
    mu: tuple
    sigma2: tuple

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        object.__setattr__(self, "sigma2", tuple(float(s) for s in self.sigma2))
        if len(self.mu) != 2 or len(self.sigma2) != 2:
            raise ParameterError("two components expected")
        if not 0 < self.p < 1:
            raise ParameterError(f"p must lie in (0, 1), got {self.p}")
        if min(self.sigma2) <= 0:
            raise ParameterError("variances must be positive")


@dataclass(frozen=True)
class MixtureHyper:
    """Conjugate prior: μj|σj ~ N(ξj, σj²/nj), σj² ~ IG(νj/2, sj²/2), p ~ Be(α, β)."""

    xi: tuple = (0.0, 0.0)
    n_prior: tuple = (1.0, 1.0)
    nu: tuple = (1.0, 1.0)
    s2: tuple = (1.0, 1.0)
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        for name in ("xi", "n_prior", "nu", "s2"):
            v = tuple(float(a) for a in getattr(self, name))
            if len(v) != 2:
                raise ParameterError(f"{name} must be a pair")
            object.__setattr__(self, name, v)
        if min(self.n_prior + self.nu + self.s2) <= 0 or not (self.alpha > 0 and self.beta > 0):
            raise ParameterError("n_prior, nu, s2, alpha and beta must be positive")

    def swapped(self) -> "MixtureHyper":
        """The same prior with the component labels exchanged."""
        r = lambda t: t[::-1]
        return MixtureHyper(r(self.xi), r(self.n_prior), r(self.nu), r(self.s2), self.beta, self.alpha)


def _as_data(data):
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise ParameterError("empty data")
    return x


def _check_allocation(z, n):
    z = np.asarray(z)
    if z.shape != (n,) or not np.isin(z, (1, 2)).all():
        raise ParameterError("allocation must be a length-n vector of 1s and 2s")
    return z


# Likelihood --------------------------------------------------------------

def _norm_logpdf(x, mu, s2):
    return -0.5 * (_LOG_2PI + np.log(s2) + (x - mu) ** 2 / s2)


def mixture_log_likelihood(data, params: MixtureParams) -> float:
    x = _as_data(data)
    a = math.log(params.p) + _norm_logpdf(x, params.mu[0], params.sigma2[0])
    b = math.log1p(-params.p) + _norm_logpdf(x, params.mu[1], params.sigma2[1])
    return float(np.sum(np.logaddexp(a, b)))


def likelihood_surface(data, mu_grid, sigma2_grid) -> np.ndarray:
    """log-likelihood of 0.5 N(0, 1) + 0.5 N(μ, σ²) on a (μ, σ²) grid.

    Rows follow ``mu_grid`` and columns follow ``sigma2_grid``.
    """
    x = _as_data(data)
    mu = np.atleast_1d(np.asarray(mu_grid, dtype=float))
    s2 = np.atleast_1d(np.asarray(sigma2_grid, dtype=float))
    if mu.size == 0 or s2.size == 0:
        raise ParameterError("grids must be nonempty")
    if np.any(s2 <= 0):
        raise ParameterError("sigma2 grid must be positive")
    base = math.log(0.5) + _norm_logpdf(x, 0.0, 1.0)
    comp = math.log(0.5) + _norm_logpdf(x[None, None, :], mu[:, None, None], s2[None, :, None])
    return np.sum(np.logaddexp(base, comp), axis=-1)


# EM ----------------------------------------------------------------------

class EmResult(NamedTuple):
    path: list
    loglik: np.ndarray
    collapsed: bool


def em_fit(data, start: MixtureParams, steps: int) -> EmResult:
    """EM for the two-component mixture; ``path`` holds start plus one entry per step.

    A component variance below 1e-12 stops the run with ``collapsed=True``.
    """
    x = _as_data(data)
    if steps < 1:
        raise ParameterError("steps must be at least 1")
    cur = start
    path = [cur]
    ll = [mixture_log_likelihood(x, cur)]
    collapsed = False
    for _ in range(steps):
        a = math.log(cur.p) + _norm_logpdf(x, cur.mu[0], cur.sigma2[0])
        b = math.log1p(-cur.p) + _norm_logpdf(x, cur.mu[1], cur.sigma2[1])
        w = special.expit(a - b)  # P(z_i = 1 | x)
        w1, w2 = w.sum(), (1 - w).sum()
        if w1 <= 0 or w2 <= 0:
            collapsed = True
            break
        mu1 = float(w @ x / w1)
        mu2 = float((1 - w) @ x / w2)
        s1 = float(w @ (x - mu1) ** 2 / w1)
        s2 = float((1 - w) @ (x - mu2) ** 2 / w2)
        p = float(w1 / x.size)
        if min(s1, s2) < COLLAPSE_TOL or not 0 < p < 1:
            collapsed = True
            break
        cur = MixtureParams(p, (mu1, mu2), (s1, s2))
        path.append(cur)
        ll.append(mixture_log_likelihood(x, cur))
    return EmResult(path, np.array(ll), collapsed)


def simulate_em_dataset(rng: np.random.Generator, n: int = 324, weights=(0.4, 0.6),
                        means=(0.0, 3.5), variances=(1.1, 0.8)) -> np.ndarray:
    """Synthetic mixture sample with the constants of the EM demonstration."""
    z = rng.choice(2, size=n, p=np.asarray(weights) / np.sum(weights))
    return rng.normal(np.asarray(means)[z], np.sqrt(np.asarray(variances))[z])


def em_random_start(data, rng: np.random.Generator) -> MixtureParams:
    """p ~ U(0,1), μ = x̄ + 2 sd ε, σ² = var Exp(1)."""
    x = _as_data(data)
    sd, var = x.std(ddof=1), x.var(ddof=1)
    return MixtureParams(rng.uniform(), tuple(x.mean() + 2 * rng.standard_normal(2) * sd),
                         tuple(rng.exponential(size=2) * var))


# Conjugate Gibbs ---------------------------------------------------------

class ComponentStats(NamedTuple):
    ell: int
    xi_z: float
    s_z: float


def component_stats(data, z, hyper: MixtureHyper, j: int) -> ComponentStats:
    """ℓj, ξj(z) and sj(z) for component ``j`` (1 or 2)."""
    x = _as_data(data)
    z = _check_allocation(z, x.size)
    return _component_stats(x, z == j, hyper, j - 1)


def _component_stats(x, mask, hyper, k):
    ell = int(mask.sum())
    nj, xi, s2 = hyper.n_prior[k], hyper.xi[k], hyper.s2[k]
    if ell == 0:
        return ComponentStats(0, xi, s2)
    xs = x[mask]
    xbar = float(xs.mean())
    ss = float(np.sum((xs - xbar) ** 2))
    return ComponentStats(ell, (nj * xi + ell * xbar) / (nj + ell),
                          s2 + ss + nj * ell / (nj + ell) * (xi - xbar) ** 2)


def allocation_probabilities(data, params: MixtureParams) -> np.ndarray:
    """P(z_i = 1 | x_i, θ) = p f1 / (p f1 + (1-p) f2)."""
    x = _as_data(data)
    a = math.log(params.p) + _norm_logpdf(x, params.mu[0], params.sigma2[0])
    b = math.log1p(-params.p) + _norm_logpdf(x, params.mu[1], params.sigma2[1])
    return special.expit(a - b)


def _gumbel_allocate(logw1, logw2, rng):
    g = rng.gumbel(size=(2,) + np.shape(logw1))
    return np.where(logw1 + g[0] >= logw2 + g[1], 1, 2)


def gibbs_mixture_chains(data, hyper: MixtureHyper, iters: int, rng: np.random.Generator,
                         chains: int = 1, keep_z: bool = False, init: MixtureParams | None = None):
    """Run ``chains`` independent conjugate Gibbs chains in lockstep.

    Returns draws of shape (iters, chains, 5) ordered (p, mu1, mu2, sigma2_1,
    sigma2_2) and, with ``keep_z``, allocations of shape (iters, chains, n).
    """
    x = _as_data(data)
    n = x.size
    if iters < 1 or chains < 1:
        raise ParameterError("iters and chains must be positive")
    if init is None:
        init = MixtureParams(0.5, (float(np.quantile(x, 0.25)), float(np.quantile(x, 0.75))),
                             (float(x.var()) or 1.0,) * 2)
    p = np.full(chains, init.p)
    mu = np.tile(np.asarray(init.mu), (chains, 1))
    s2 = np.tile(np.asarray(init.sigma2), (chains, 1))
    xi = np.asarray(hyper.xi)
    nj = np.asarray(hyper.n_prior)
    nu = np.asarray(hyper.nu)
    s2h = np.asarray(hyper.s2)
    out = np.empty((iters, chains, 5))
    zs = np.empty((iters, chains, n), dtype=np.int8) if keep_z else None
    for t in range(iters):
        lw1 = np.log(p)[:, None] + _norm_logpdf(x[None, :], mu[:, :1], s2[:, :1])
        lw2 = np.log1p(-p)[:, None] + _norm_logpdf(x[None, :], mu[:, 1:], s2[:, 1:])
        z = _gumbel_allocate(lw1, lw2, rng)
        mask = np.stack([z == 1, z == 2], axis=1)  # chains x 2 x n
        ell = mask.sum(axis=2)
        sums = mask @ x
        safe = np.maximum(ell, 1)
        xbar = np.where(ell > 0, sums / safe, 0.0)
        ss = np.einsum("cjn,cjn->cj", mask, (x[None, None, :] - xbar[:, :, None]) ** 2)
        xi_z = (nj * xi + ell * xbar) / (nj + ell)
        s_z = s2h + ss + nj * ell / (nj + ell) * (xi - xbar) ** 2
        p = rng.beta(hyper.alpha + ell[:, 0], hyper.beta + ell[:, 1])
        s2 = 0.5 * s_z / rng.gamma(0.5 * (nu + ell))
        mu = xi_z + np.sqrt(s2 / (nj + ell)) * rng.standard_normal((chains, 2))
        out[t, :, 0] = p
        out[t, :, 1:3] = mu
        out[t, :, 3:] = s2
        if keep_z:
            zs[t] = z
    return (out, zs) if keep_z else out


def gibbs_mixture(data, hyper: MixtureHyper, iters: int, rng: np.random.Generator,
                  init: MixtureParams | None = None, keep_z: bool = False,
                  warmup: int | None = None) -> Trace:
    """Conjugate Gibbs sampler for the two-component mixture.

    Each iteration draws the allocations, then p ~ Be(α+ℓ1, β+ℓ2),
    σj² ~ IG((νj+ℓj)/2, sj(z)/2) and μj ~ N(ξj(z), σj²/(nj+ℓj)).  An empty
    component is redrawn from its prior.
    """
    res = gibbs_mixture_chains(data, hyper, iters, rng, 1, keep_z, init)
    draws, zs = res if keep_z else (res, None)
    extras = {"z": zs[:, 0, :]} if keep_z else {}
    return Trace(draws[:, 0, :], None, default_warmup(iters) if warmup is None else warmup,
                 ("p", "mu1", "mu2", "sigma2_1", "sigma2_2"), extras)


def allocation_log_weight(data, z, hyper: MixtureHyper) -> float:
    """Unnormalized log ω(z), the marginal posterior weight of an allocation.

    log ω(z) = log Γ(α+ℓ1) + log Γ(β+ℓ2) - log Γ(α+β+n)
               + Σj [log Γ((ℓj+νj)/2) - ((νj+ℓj)/2) log(sj(z)/2) - ½ log(nj+ℓj)].
    """
    x = _as_data(data)
    z = _check_allocation(z, x.size)
    total = 0.0
    ells = []
    for k in (0, 1):
        st = _component_stats(x, z == k + 1, hyper, k)
        ells.append(st.ell)
        a = 0.5 * (hyper.nu[k] + st.ell)
        total += special.gammaln(a) - a * math.log(st.s_z / 2) - 0.5 * math.log(hyper.n_prior[k] + st.ell)
    total += (special.gammaln(hyper.alpha + ells[0]) + special.gammaln(hyper.beta + ells[1])
              - special.gammaln(hyper.alpha + hyper.beta + x.size))
    return float(total)


MAX_ENUMERATION = 16


class AllocationLaw(NamedTuple):
    allocations: np.ndarray  # 2^n x n, values in {1, 2}
    log_prob: np.ndarray     # normalized


def enumerate_allocations(data, hyper: MixtureHyper) -> AllocationLaw:
    """Exact posterior law of z by summing ω over all 2^n allocations."""
    x = _as_data(data)
    if x.size > MAX_ENUMERATION:
        raise ParameterError(f"enumeration limited to n <= {MAX_ENUMERATION}")
    Z = np.array(list(itertools.product((1, 2), repeat=x.size)), dtype=np.int8)
    lw = np.array([allocation_log_weight(x, z, hyper) for z in Z])
    return AllocationLaw(Z, lw - special.logsumexp(lw))


def exact_posterior_mean_p(data, hyper: MixtureHyper) -> float:
    """E[p | x] = Σ_z ω(z) (α+ℓ1)/(α+β+n)."""
    x = _as_data(data)
    law = enumerate_allocations(x, hyper)
    ell1 = (law.allocations == 1).sum(axis=1)
    return float(np.exp(law.log_prob) @ ((hyper.alpha + ell1) / (hyper.alpha + hyper.beta + x.size)))


def allocation_codes(z) -> np.ndarray:
    """Integer code of each allocation row, matching the row order of :func:`enumerate_allocations`."""
    z = np.asarray(z)
    bits = (z == 2).astype(np.int64)
    weights = 1 << np.arange(bits.shape[-1] - 1, -1, -1)
    return bits @ weights


# Mean mixtures with unit variances ---------------------------------------

def _location_init(x, init):
    if init is None:
        return float(np.quantile(x, 0.25)), float(np.quantile(x, 0.75))
    mu1, mu2 = map(float, init)
    return mu1, mu2


def _mean_allocate(x, mu1, mu2, p, gamma, rng):
    lw1 = math.log(p) - 0.5 * (x - mu1) ** 2
    lw2 = math.log1p(-p) - 0.5 * (x - mu2) ** 2
    g = rng.gumbel(size=(2, gamma, x.size))
    return np.where(lw1 + g[0] >= lw2 + g[1], 1, 2)  # gamma x n


class NormalMoments(NamedTuple):
    mean: float
    var: float


def annealed_mu_conditionals(data, z_dup, gamma: int, lam: float, delta: float):
    """Conditionals of μ1 and μ2 given duplicated allocations ``z_dup`` (gamma x n)."""
    x = _as_data(data)
    z_dup = np.asarray(z_dup).reshape(gamma, x.size)
    ell = int((z_dup == 1).sum())
    s1 = float(np.sum(np.where(z_dup == 1, x, 0.0)))
    s2 = float(np.sum(np.where(z_dup == 2, x, 0.0)))
    prec1 = gamma * lam + ell
    prec2 = gamma * lam + gamma * x.size - ell
    if prec1 <= 0 or prec2 <= 0:
        raise ParameterError("empty component with a flat prior; use lambda > 0")
    return (NormalMoments((gamma * lam * delta + s1) / prec1, 1.0 / prec1),
            NormalMoments((gamma * lam * delta + s2) / prec2, 1.0 / prec2))


def mu0_conditional(data, z, xi: float, lam: float = 0.0, delta: float = 0.0) -> NormalMoments:
    """μ0 | ξ, x, z with μ1 = μ0 - ξ, μ2 = μ0 + ξ and μj ~ N(δ, 1/λ) priors."""
    x = _as_data(data)
    z = _check_allocation(z, x.size)
    ell1, ell2 = int((z == 1).sum()), int((z == 2).sum())
    prec = x.size + 2 * lam
    return NormalMoments((x.sum() + (ell1 - ell2) * xi + 2 * lam * delta) / prec, 1.0 / prec)


def xi_conditional(data, z, mu0: float, lam: float = 0.0) -> NormalMoments:
    """ξ | μ0, x, z under the same parameterization."""
    x = _as_data(data)
    z = _check_allocation(z, x.size)
    d = x - mu0
    prec = x.size + 2 * lam
    return NormalMoments((d[z == 2].sum() - d[z == 1].sum()) / prec, 1.0 / prec)


def gibbs_mixture_annealed(data, lam: float, delta: float, gamma: int, iters: int,
                           rng: np.random.Generator, p: float = 0.3, init=None,
                           warmup: int | None = None) -> Trace:
    """Gibbs sampler for the power posterior π(μ1, μ2 | x)^γ of a mean mixture.

    The model is p N(μ1, 1) + (1-p) N(μ2, 1) with μj ~ N(δ, 1/λ).  Each
    observation is allocated γ times; μ1 is then drawn from
    N((γλδ + Σ_{z=1} x)/(γλ + ℓ), 1/(γλ + ℓ)) and μ2 symmetrically.
    """
    x = _as_data(data)
    if int(gamma) != gamma or gamma < 1:
        raise ParameterError("gamma must be an integer >= 1")
    if lam < 0 or not 0 < p < 1:
        raise ParameterError("need lambda >= 0 and p in (0, 1)")
    gamma = int(gamma)
    mu1, mu2 = _location_init(x, init)
    out = np.empty((iters, 2))
    for t in range(iters):
        z = _mean_allocate(x, mu1, mu2, p, gamma, rng)
        c1, c2 = annealed_mu_conditionals(x, z, gamma, lam, delta)
        e = rng.standard_normal(2)
        mu1 = c1.mean + math.sqrt(c1.var) * e[0]
        mu2 = c2.mean + math.sqrt(c2.var) * e[1]
        out[t] = mu1, mu2
    return Trace(out, None, default_warmup(iters) if warmup is None else warmup, ("mu1", "mu2"),
                 {"gamma": gamma})


def gibbs_mixture_location(data, xi0: float, lam: float, iters: int, rng: np.random.Generator,
                           parameterization: str = "mu1mu2", p: float = 0.3, init=None,
                           warmup: int | None = None) -> Trace:
    """Mean-mixture Gibbs sampler in the (μ1, μ2) or the (μ0, ξ) parameterization.

    ``xi0`` is the common prior mean δ of μ1 and μ2 and ``lam`` their prior
    precision.  In the (μ0, ξ) form, μ1 = μ0 - ξ and μ2 = μ0 + ξ; the
    conditionals have precision n + 2λ and reduce to the flat-prior ones at
    λ = 0.  Draws are always reported as (μ1, μ2).
    """
    if parameterization == "mu1mu2":
        return gibbs_mixture_annealed(data, lam, xi0, 1, iters, rng, p, init, warmup)
    if parameterization != "mu0xi":
        raise ParameterError("parameterization must be 'mu1mu2' or 'mu0xi'")
    x = _as_data(data)
    if lam < 0 or not 0 < p < 1:
        raise ParameterError("need lambda >= 0 and p in (0, 1)")
    mu1, mu2 = _location_init(x, init)
    mu0, xi = 0.5 * (mu1 + mu2), 0.5 * (mu2 - mu1)
    n = x.size
    sx = x.sum()
    sd = 1.0 / math.sqrt(n + 2 * lam)
    out = np.empty((iters, 2))
    for t in range(iters):
        z = _mean_allocate(x, mu0 - xi, mu0 + xi, p, 1, rng)[0]
        e = rng.standard_normal(2)
        ell1 = int((z == 1).sum())
        mu0 = (sx + (2 * ell1 - n) * xi + 2 * lam * xi0) * sd**2 + sd * e[0]
        d = x - mu0
        xi = (d[z == 2].sum() - d[z == 1].sum()) * sd**2 + sd * e[1]
        out[t] = mu0 - xi, mu0 + xi
    return Trace(out, None, default_warmup(iters) if warmup is None else warmup, ("mu1", "mu2"))


def partitions_count(n: int, k: int) -> int:
    """Number of nonnegative integer solutions of n1 + ... + nk = n, C(n+k-1, n)."""
    if n < 0 or k < 1:
        raise ParameterError("need n >= 0 and k >= 1")
    return math.comb(n + k - 1, n)
