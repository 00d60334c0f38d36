"""Markov chain kernels, model-specific Gibbs samplers and chain summaries."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import optimize, special

from . import _linalg as la
from . import dist
from .dist import ScalarDistribution
from .errors import ParameterError

LogDensity = Callable[[np.ndarray], np.ndarray]

DEFAULT_MIXTURE_VARIANCES = (0.01, 0.1, 1.0, 10.0, 100.0)


def default_warmup(iters: int) -> int:
    """Ten percent of the run."""
    return int(iters) // 10


@dataclass
class Trace:
    """Sampler output: one row per iteration plus an acceptance sidecar."""

    draws: np.ndarray
    accepted: np.ndarray | None = None
    warmup: int = 0
    names: tuple = ()
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.draws = np.asarray(self.draws, dtype=float)
        if self.draws.ndim == 1:
            self.draws = self.draws[:, None]
        if not 0 <= self.warmup < max(self.iterations, 1):
            raise ParameterError("warmup must be smaller than the number of iterations")
        if self.accepted is not None:
            self.accepted = np.asarray(self.accepted, dtype=bool)
            if self.accepted.size != self.iterations:
                raise ParameterError("accepted must have one entry per iteration")

    @property
    def iterations(self) -> int:
        return self.draws.shape[0]

    @property
    def dims(self) -> int:
        return self.draws.shape[1]

    @property
    def kept(self) -> np.ndarray:
        return self.draws[self.warmup:]

    def column(self, name) -> np.ndarray:
        return self.draws[:, self.names.index(name)]

    @property
    def acceptance_rate(self) -> float | None:
        return None if self.accepted is None else float(self.accepted.mean())


# Metropolis-Hastings -----------------------------------------------------

KERNEL_KINDS = ("independence", "random_walk", "random_walk_mixture",
                "transformed_rw_log", "transformed_rw_logit")


@dataclass(frozen=True)
class KernelSpec:
    """Proposal mechanism.

    ``independence`` uses ``proposal``; the random walks use ``scale`` (a
    standard deviation, or the Cauchy scale when ``step='cauchy'``);
    ``random_walk_mixture`` picks one of ``variances`` uniformly each step;
    the transformed walks move on log(x) or logit(x) with sd ``scale``.
    """

    kind: str
    proposal: ScalarDistribution | None = None
    scale: float = 1.0
    step: str = "normal"
    variances: tuple = DEFAULT_MIXTURE_VARIANCES

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ParameterError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "independence" and self.proposal is None:
            raise ParameterError("independence kernel needs a proposal distribution")
        if self.kind == "random_walk_mixture":
            v = tuple(float(s) for s in self.variances)
            if not v or min(v) <= 0:
                raise ParameterError("mixture variances must be nonempty and positive")
            object.__setattr__(self, "variances", v)
        elif not self.scale > 0:
            raise ParameterError("scale must be positive")
        if self.step not in ("normal", "cauchy"):
            raise ParameterError("step must be 'normal' or 'cauchy'")


def _log_jacobian(kind, x):
    if kind == "transformed_rw_log":
        return math.log(x)
    if kind == "transformed_rw_logit":
        return math.log(x) + math.log1p(-x)
    return 0.0


def mh_log_ratio(log_target_unnorm: LogDensity, kernel: KernelSpec, x: float, y: float) -> float:
    """log of the acceptance ratio for a move x -> y (before capping at 1)."""
    r = float(log_target_unnorm(np.asarray(y))) - float(log_target_unnorm(np.asarray(x)))
    if kernel.kind == "independence":
        r += dist.log_pdf(kernel.proposal, x) - dist.log_pdf(kernel.proposal, y)
    return r + _log_jacobian(kernel.kind, y) - _log_jacobian(kernel.kind, x)


def mh_chain(log_target_unnorm: LogDensity, kernel: KernelSpec, x0: float, iters: int,
             rng: np.random.Generator, warmup: int | None = None) -> Trace:
    """Scalar Metropolis-Hastings chain.

    The log-target of the current state is cached, so each iteration costs
    one target evaluation.  Transformed walks include the Jacobian of the
    log or logit map in the ratio.
    """
    x = float(x0)
    lf_x = float(log_target_unnorm(np.asarray(x)))
    if not math.isfinite(lf_x):
        raise ParameterError("log target must be finite at x0")
    kind = kernel.kind
    if kind == "transformed_rw_log" and x <= 0 or kind == "transformed_rw_logit" and not 0 < x < 1:
        raise ParameterError("x0 outside the support of the transformed walk")

    log_u = np.log(rng.random(iters))
    if kind == "independence":
        props = np.asarray(dist.sample(kernel.proposal, rng, iters), dtype=float)
        lg_props = dist.log_pdf(kernel.proposal, props)
        lg_x = dist.log_pdf(kernel.proposal, x)
    else:
        noise = rng.standard_cauchy(iters) if kernel.step == "cauchy" else rng.standard_normal(iters)
        if kind == "random_walk_mixture":
            idx = rng.integers(len(kernel.variances), size=iters)
            steps = np.sqrt(np.asarray(kernel.variances))[idx] * noise
        else:
            steps = kernel.scale * noise

    out = np.empty(iters)
    acc = np.zeros(iters, dtype=bool)
    for t in range(iters):
        if kind == "independence":
            y = props[t]
            extra = lg_x - lg_props[t]
        elif kind == "transformed_rw_log":
            y = x * math.exp(steps[t])
            extra = steps[t]  # log y - log x
        elif kind == "transformed_rw_logit":
            ly = special.logit(x) + steps[t]
            y = float(special.expit(ly))
            if not 0.0 < y < 1.0:
                out[t] = x
                continue
            extra = math.log(y) + math.log1p(-y) - math.log(x) - math.log1p(-x)
        else:
            y = x + steps[t]
            extra = 0.0
        lf_y = float(log_target_unnorm(np.asarray(y)))
        if log_u[t] < lf_y - lf_x + extra:
            x, lf_x = y, lf_y
            if kind == "independence":
                lg_x = lg_props[t]
            acc[t] = True
        out[t] = x
    extras = {"scale_index": idx} if kind == "random_walk_mixture" else {}
    return Trace(out, acc, default_warmup(iters) if warmup is None else warmup, ("x",), extras)


def inverse_normal_log_unnorm(theta1: float = 1.5, theta2: float = 2.0) -> LogDensity:
    """log of x^{-3/2} exp(-θ1 x - θ2/x) on x > 0."""
    def logf(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = -1.5 * np.log(x) - theta1 * x - theta2 / x
        return np.where(x > 0, v, -np.inf)
    return logf


def cauchy_location_log_unnorm(data=(0.0, 5.0, 9.0), prior_var: float = 50.0) -> LogDensity:
    """Posterior of a Cauchy location with a N(0, prior_var) prior.

    exp(-θ²/100) corresponds to the default variance of 50.
    """
    x = np.asarray(data, dtype=float)

    def logf(theta):
        th = np.asarray(theta, dtype=float)
        return -th**2 / (2 * prior_var) - np.sum(np.log1p((x[:, None] - th.ravel()) ** 2), axis=0).reshape(th.shape)
    return logf


# Gibbs samplers ----------------------------------------------------------

def gibbs_normal_model(data, theta0_prior: tuple[float, float], sigma_prior: tuple[float, float],
                       iters: int, rng: np.random.Generator, sigma2_init: float | None = None,
                       warmup: int | None = None) -> Trace:
    """Two-block Gibbs for x_i ~ N(θ, σ²), θ ~ N(θ0, τ²), σ² ~ IG(a, b).

    θ | σ² ~ N((σ²θ0 + nτ²x̄)/(σ² + nτ²), σ²τ²/(σ² + nτ²)) and
    σ² | θ ~ IG(n/2 + a, Σ(x_i - θ)²/2 + b).
    """
    x = np.asarray(data, dtype=float)
    n = x.size
    if n < 1:
        raise ParameterError("need at least one observation")
    theta0, tau2 = map(float, theta0_prior)
    a, b = map(float, sigma_prior)
    if not (tau2 > 0 and a > 0 and b > 0):
        raise ParameterError("tau2, a and b must be positive")
    xbar = x.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    sigma2 = float(sigma2_init) if sigma2_init is not None else (sxx / max(n - 1, 1) or 1.0)
    z = rng.standard_normal(iters)
    shape = n / 2 + a
    g = rng.gamma(shape, 1.0, iters)
    out = np.empty((iters, 2))
    for t in range(iters):
        den = sigma2 + n * tau2
        theta = (sigma2 * theta0 + n * tau2 * xbar) / den + math.sqrt(sigma2 * tau2 / den) * z[t]
        sigma2 = (0.5 * (sxx + n * (xbar - theta) ** 2) + b) / g[t]
        out[t] = theta, sigma2
    return Trace(out, None, default_warmup(iters) if warmup is None else warmup, ("theta", "sigma2"))


def gibbs_beta_binomial(n: int, a: float, b: float, iters: int, rng: np.random.Generator,
                        theta0: float = 0.5, warmup: int | None = None) -> Trace:
    """η | θ ~ Bin(n, θ), θ | η ~ Be(a + η, b + n - η); the θ-marginal is Be(a, b)."""
    if n < 1 or not (a > 0 and b > 0):
        raise ParameterError("need n >= 1 and positive a, b")
    theta = float(theta0)
    out = np.empty((iters, 2))
    for t in range(iters):
        eta = rng.binomial(n, theta)
        theta = rng.beta(a + eta, b + n - eta)
        out[t] = theta, eta
    return Trace(out, None, default_warmup(iters) if warmup is None else warmup, ("theta", "eta"))


class NormalConditional(NamedTuple):
    mean: np.ndarray
    cov: np.ndarray


def probit_beta_conditional(X, z) -> NormalConditional:
    """β | z ~ N((X'X)^{-1}X'z, (X'X)^{-1}) under a flat prior."""
    X = la.as_matrix(X, "X")
    cov = la.inv_spd(la.gram(X), "X'X")
    return NormalConditional(cov @ (X.T @ np.asarray(z, dtype=float)), cov)


def probit_separated(y, X) -> bool:
    """True if some β strictly separates the classes (the flat-prior posterior is then improper)."""
    y = np.asarray(y)
    X = la.as_matrix(X, "X")
    s = np.where(y > 0, 1.0, -1.0)
    # feasibility of s_i x_i'β >= 1 for all i
    res = optimize.linprog(np.zeros(X.shape[1]), A_ub=-(s[:, None] * X), b_ub=-np.ones(len(y)),
                           bounds=[(None, None)] * X.shape[1], method="highs")
    return res.status == 0


def gibbs_probit(y, X, iters: int, rng: np.random.Generator, beta0=None,
                 keep_z: bool = False, warmup: int | None = None) -> Trace:
    """Albert-Chib data augmentation for a probit regression with a flat prior.

    z_i | β is N(x_i'β, 1) truncated to (0, ∞) when y_i = 1 and to
    (-∞, 0) when y_i = 0; then β | z ~ N((X'X)^{-1}X'z, (X'X)^{-1}).
    Degenerate responses and separable data are flagged in ``extras``.
    """
    y = np.asarray(y)
    X = la.as_matrix(X, "X")
    if y.ndim != 1 or y.size != X.shape[0] or not np.isin(y, (0, 1)).all():
        raise ParameterError("y must be a 0/1 vector with one entry per row of X")
    cond = probit_beta_conditional(X, np.zeros(y.size))
    chol = la.cholesky(cond.cov, "(X'X)^{-1}")
    proj = cond.cov @ X.T
    side = np.where(y == 1, 1.0, -1.0)
    flags = {"degenerate_y": bool(y.min() == y.max()), "separated": probit_separated(y, X)}
    if flags["degenerate_y"] or flags["separated"]:
        warnings.warn("probit data are separable; the flat-prior posterior may be improper",
                      RuntimeWarning, stacklevel=2)
    beta = np.zeros(X.shape[1]) if beta0 is None else np.asarray(beta0, dtype=float)
    out = np.empty((iters, X.shape[1]))
    zs = np.empty((iters, y.size)) if keep_z else None
    sign_ok = True
    for t in range(iters):
        z = dist.sample_truncated_normal(X @ beta, side, rng)
        sign_ok &= bool(np.all(side * z > 0))
        beta = proj @ z + chol @ rng.standard_normal(X.shape[1])
        out[t] = beta
        if keep_z:
            zs[t] = z
    extras = dict(flags, z_sign_consistent=sign_ok)
    if keep_z:
        extras["z"] = zs
    names = tuple(f"beta{j}" for j in range(X.shape[1]))
    return Trace(out, None, default_warmup(iters) if warmup is None else warmup, names, extras)


# Summaries ---------------------------------------------------------------

class ChainSummary(NamedTuple):
    means: np.ndarray
    sds: np.ndarray
    acf: np.ndarray  # (max_lag + 1) x dims, lag 0 first
    acceptance_rate: float | None


def autocorrelation(x, max_lag: int) -> np.ndarray:
    """Sample autocorrelation by direct sums; a constant series has acf 1."""
    x = np.asarray(x, dtype=float)
    d = x - x.mean()
    denom = float(d @ d)
    out = np.ones(max_lag + 1)
    if denom == 0.0:
        return out
    for k in range(1, max_lag + 1):
        out[k] = float(d[:-k] @ d[k:]) / denom
    return out


def chain_summary(trace: Trace, warmup: int | None = None) -> ChainSummary:
    """Post-warmup means, standard deviations and autocorrelations.

    Lags run up to min(1000, N/10) for N kept iterations.
    """
    w = trace.warmup if warmup is None else int(warmup)
    if not 0 <= w < trace.iterations:
        raise ParameterError("warmup must be smaller than the number of iterations")
    kept = trace.draws[w:]
    n = kept.shape[0]
    max_lag = max(0, min(1000, n // 10))
    acf = np.column_stack([autocorrelation(kept[:, j], max_lag) for j in range(kept.shape[1])])
    sds = kept.std(axis=0, ddof=1) if n > 1 else np.zeros(kept.shape[1])
    rate = None if trace.accepted is None else float(trace.accepted[w:].mean())
    return ChainSummary(kept.mean(axis=0), sds, acf, rate)
