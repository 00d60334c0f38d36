"""Closed-form Bayesian updating.

Covers the seven conjugate pairs of the standard table, the normal
inverse-gamma (NIG) prior for a normal sample, conjugate linear regression
(posterior, predictive, marginal likelihood, HPD radius), Zellner's g-prior
determinant identity and several closed-form Bayes factors.

NIG convention: ``mu | sigma2 ~ N(xi, sigma2 / lambda_mu)`` and
``sigma2 ~ IG(lambda_sigma, alpha)``, so the prior marginal of ``mu`` is
``T(2 lambda_sigma, xi, alpha / (lambda_mu lambda_sigma))``.  The posterior
bookkeeping keeps the exponent form ``(sigma2)^{-lambda_sigma(D)}`` with
``lambda_sigma(D) = lambda_sigma + 3/2 + n/2`` and ``alpha(D)`` on the
``2 alpha`` scale; :meth:`NigPosterior.as_prior` converts back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special, stats

from . import _linalg as la
from . import dist
from .dist import Family, ScalarDistribution
from .errors import PairingError, ParameterError

# Conjugate table ---------------------------------------------------------

CONJUGATE_PAIRS = {
    "normal_mean": Family.NORMAL,
    "poisson": Family.GAMMA,
    "gamma": Family.GAMMA,
    "binomial": Family.BETA,
    "neg_binomial": Family.BETA,
    "multinomial": Family.DIRICHLET,
    "normal_precision": Family.GAMMA,
}


def conjugate_update(family: str, prior: ScalarDistribution, datum, **known) -> ScalarDistribution:
    """Update ``prior`` after observing ``datum`` from the likelihood ``family``.

    Known likelihood constants are passed by keyword:

    - ``normal_mean``: ``sigma2`` (observation variance); prior N(mu, tau2)
    - ``poisson``: none; prior G(alpha, beta)
    - ``gamma``: ``shape`` (nu of G(nu, theta)); prior G(alpha, beta) on the rate
    - ``binomial``: ``n``; prior Be(alpha, beta)
    - ``neg_binomial``: ``m`` (successes), datum = failures; prior Be(alpha, beta)
    - ``multinomial``: datum = count vector; prior Dirichlet(alpha)
    - ``normal_precision``: ``mu``; prior G(alpha, beta) on 1/sigma2
    """
    if family not in CONJUGATE_PAIRS or prior.family is not CONJUGATE_PAIRS[family]:
        raise PairingError(f"no conjugate update for likelihood {family!r} with a "
                           f"{prior.family.value} prior")
    p = prior.params
    if family == "normal_mean":
        sigma2 = _known(known, "sigma2")
        mu, tau2 = p
        rho = 1.0 / (sigma2 + tau2)
        return dist.normal(rho * (tau2 * datum + sigma2 * mu), rho * tau2 * sigma2)
    if family == "poisson":
        return dist.gamma(p[0] + datum, p[1] + 1.0)
    if family == "gamma":
        return dist.gamma(p[0] + _known(known, "shape"), p[1] + datum)
    if family == "binomial":
        n = _known(known, "n")
        if not 0 <= datum <= n:
            raise ParameterError(f"binomial datum {datum} outside 0..{n}")
        return dist.beta(p[0] + datum, p[1] + n - datum)
    if family == "neg_binomial":
        return dist.beta(p[0] + _known(known, "m"), p[1] + datum)
    if family == "multinomial":
        x = np.asarray(datum, dtype=float)
        if x.shape != (len(p),):
            raise ParameterError("count vector length does not match the Dirichlet")
        return dist.dirichlet(np.array(p) + x)
    mu = _known(known, "mu")
    return dist.gamma(p[0] + 0.5, p[1] + 0.5 * (mu - datum) ** 2)


def _known(known, name):
    if name not in known:
        raise ParameterError(f"missing known constant {name!r}")
    return known[name]


# Normal inverse-gamma ----------------------------------------------------

@dataclass(frozen=True)
class NigParams:
    """NIG prior: mu | sigma2 ~ N(xi, sigma2/lambda_mu), sigma2 ~ IG(lambda_sigma, alpha)."""

    xi: float
    lambda_mu: float
    lambda_sigma: float
    alpha: float

    def __post_init__(self):
        for name in ("lambda_mu", "lambda_sigma", "alpha"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be positive, got {v!r}")

    def sigma2_marginal(self) -> ScalarDistribution:
        return dist.inverse_gamma(self.lambda_sigma, self.alpha)

    def mu_marginal(self) -> ScalarDistribution:
        return dist.student_t(2 * self.lambda_sigma, self.xi,
                              self.alpha / (self.lambda_mu * self.lambda_sigma))


class SufficientStats(NamedTuple):
    n: int
    xbar: float
    s2: float  # sum of squared deviations, not divided by n


def sufficient_stats(data: Sequence[float]) -> SufficientStats:
    x = np.asarray(data, dtype=float)
    if x.size == 0:
        raise ParameterError("empty data")
    xbar = float(x.mean())
    return SufficientStats(x.size, xbar, float(np.sum((x - xbar) ** 2)))


@dataclass(frozen=True)
class NigPosterior:
    """Posterior ∝ (σ²)^{-lambda_sigma} exp{-(lambda_mu (μ-xi)² + alpha)/2σ²}."""

    xi: float
    lambda_mu: float
    lambda_sigma: float
    alpha: float

    def as_prior(self) -> NigParams:
        """The same law written as a :class:`NigParams` (IG(λσ-3/2, α/2) on σ²)."""
        return NigParams(self.xi, self.lambda_mu, self.lambda_sigma - 1.5, self.alpha / 2)


def nig_posterior(prior: NigParams, data=None, *, stats: SufficientStats | None = None) -> NigPosterior:
    """Posterior of (μ, σ²) for an iid normal sample under a NIG prior.

    Pass either raw ``data`` or precomputed ``stats`` = (n, x̄, s²) with s²
    the sum of squared deviations.  The shrinkage coefficient of the
    (x̄-ξ)² term is n λμ / (λμ + n).
    """
    if stats is None:
        if data is None:
            raise ParameterError("provide data or sufficient statistics")
        stats = sufficient_stats(data)
    n, xbar, s2 = stats
    if n < 1:
        raise ParameterError("need at least one observation")
    lam_mu = prior.lambda_mu + n
    coef = n * prior.lambda_mu / lam_mu
    return NigPosterior(
        xi=(prior.lambda_mu * prior.xi + n * xbar) / lam_mu,
        lambda_mu=lam_mu,
        lambda_sigma=prior.lambda_sigma + 1.5 + n / 2,
        alpha=2 * prior.alpha + coef * (xbar - prior.xi) ** 2 + s2,
    )


def nig_marginal_mu_logpdf(prior: NigParams, mu) -> float:
    """Log-density of the NIG marginal of μ, T(2λσ, ξ, α/(λμ λσ))."""
    d = prior.mu_marginal()
    return dist.student_t_logpdf(mu, *d.params)


# Conjugate regression ----------------------------------------------------

@dataclass(frozen=True)
class RegressionConjugate:
    """β | σ² ~ N_p(beta_tilde, σ² M^{-1}), σ² ~ IG(a, b)."""

    beta_tilde: np.ndarray
    M: np.ndarray
    a: float
    b: float

    def __post_init__(self):
        bt = np.atleast_1d(np.asarray(self.beta_tilde, dtype=float))
        M = la.as_matrix(self.M, "M")
        if M.shape != (bt.size, bt.size):
            raise ParameterError("M must be p x p with p = len(beta_tilde)")
        la.cholesky(M, "M")
        if not (self.a > 0 and self.b > 0):
            raise ParameterError("a and b must be positive")
        object.__setattr__(self, "beta_tilde", bt)
        object.__setattr__(self, "M", M)


class MultivariateT(NamedTuple):
    df: float
    loc: np.ndarray
    scale: np.ndarray

    def logpdf(self, x) -> float:
        return float(stats.multivariate_t.logpdf(np.atleast_1d(x), self.loc, self.scale, self.df))


@dataclass(frozen=True)
class RegressionPosterior:
    """β | σ², y ~ N(mean, σ² K^{-1}) with K = M + X'X; σ² | y ~ IG(shape, scale)."""

    mean: np.ndarray
    K: np.ndarray
    shape: float
    scale: float
    n: int

    @property
    def cov_unscaled(self) -> np.ndarray:
        return la.inv_spd(self.K, "M + X'X")

    def sigma2_marginal(self) -> ScalarDistribution:
        return dist.inverse_gamma(self.shape, self.scale)

    def beta_marginal(self) -> MultivariateT:
        """Student marginal of β: T_p(2 shape, mean, (scale/shape) K^{-1})."""
        return MultivariateT(2 * self.shape, self.mean, self.scale / self.shape * self.cov_unscaled)


def _ols(X, y):
    XtX = la.gram(X)
    beta_hat = la.solve_spd(XtX, X.T @ y, "X'X")
    resid = y - X @ beta_hat
    return XtX, beta_hat, float(resid @ resid)


def _check_xy(X, y, p):
    X = la.as_matrix(X, "X")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if X.shape[0] != y.size or X.shape[1] != p:
        raise ParameterError(f"X must be {y.size} x {p}, got {X.shape}")
    return X, y


def regression_posterior(prior: RegressionConjugate, X, y) -> RegressionPosterior:
    """Conjugate posterior for y ~ N_n(Xβ, σ² I_n)."""
    p = prior.beta_tilde.size
    X, y = _check_xy(X, y, p)
    XtX, beta_hat, s2 = _ols(X, y)
    K = prior.M + XtX
    mean = la.solve_spd(K, XtX @ beta_hat + prior.M @ prior.beta_tilde, "M + X'X")
    diff = prior.beta_tilde - beta_hat
    # (M^{-1} + (X'X)^{-1})^{-1}, formed symmetrically
    W = la.inv_spd(la.inv_spd(prior.M, "M") + la.inv_spd(XtX, "X'X"))
    quad = float(diff @ W @ diff)
    return RegressionPosterior(mean, K, y.size / 2 + prior.a, prior.b + 0.5 * (s2 + quad), y.size)


def jeffreys_regression_posterior(X, y) -> MultivariateT:
    """β | y under π(β, σ²) ∝ 1/σ²: T_p(n-p, β̂, s²/(n-p) (X'X)^{-1})."""
    X = la.as_matrix(X, "X")
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if n <= p:
        raise ParameterError("need n > p")
    XtX, beta_hat, s2 = _ols(X, y)
    return MultivariateT(n - p, beta_hat, s2 / (n - p) * la.inv_spd(XtX))


def regression_predictive(post: RegressionPosterior, X_new) -> MultivariateT:
    """Predictive law of ỹ = X̃β + ε: T_m(n+2a, X̃ mean, (2 scale/(n+2a)) (I + X̃ K^{-1} X̃'))."""
    X_new = la.as_matrix(X_new, "X_new")
    if X_new.shape[1] != post.mean.size:
        raise ParameterError("X_new has the wrong number of columns")
    m = X_new.shape[0]
    df = 2 * post.shape
    S = (2 * post.scale / df) * (np.eye(m) + X_new @ post.cov_unscaled @ X_new.T)
    return MultivariateT(df, X_new @ post.mean, 0.5 * (S + S.T))


def marginal_y_logpdf(prior: RegressionConjugate, X, y) -> float:
    """log m(y) = log T_n(2a, Xβ̃, (b/a)(I_n + X M^{-1} X'))."""
    X, y = _check_xy(X, y, prior.beta_tilde.size)
    S = (prior.b / prior.a) * (np.eye(y.size) + X @ la.inv_spd(prior.M, "M") @ X.T)
    return MultivariateT(2 * prior.a, X @ prior.beta_tilde, 0.5 * (S + S.T)).logpdf(y)


class DetIdentity(NamedTuple):
    det: float
    expected: float


def gprior_det_identity(X, g: float) -> DetIdentity:
    """det(I_n + g X(X'X)^{-1}X') computed numerically, against (g+1)^p."""
    X = la.as_matrix(X, "X")
    H = X @ la.solve_spd(la.gram(X), X.T, "X'X")
    sign, logdet = np.linalg.slogdet(np.eye(X.shape[0]) + g * H)
    return DetIdentity(float(sign * math.exp(logdet)), float((g + 1.0) ** X.shape[1]))


def gprior_eigenvalues(X, g: float) -> np.ndarray:
    """Ascending eigenvalues of I_n + g X(X'X)^{-1}X'."""
    X = la.as_matrix(X, "X")
    H = X @ la.solve_spd(la.gram(X), X.T, "X'X")
    A = np.eye(X.shape[0]) + g * H
    return la.eigh(0.5 * (A + A.T))[0]


def hpd_beta_radius(post: RegressionPosterior, alpha: float) -> float:
    """Radius k with P((β-μ̂)'Σ̂^{-1}(β-μ̂) <= k) = alpha under the Student marginal.

    The quadratic form divided by p is F(p, n+2a), hence k = p F^{-1}(alpha).
    """
    if not 0 < alpha < 1:
        raise ParameterError("alpha must lie in (0, 1)")
    p = post.mean.size
    return float(p * stats.f.ppf(alpha, p, 2 * post.shape))


# Bayes factors -----------------------------------------------------------

def bayes_factor_shift(z: float, rat: float) -> float:
    """sqrt(1/(1+rat)) exp(z²/(2(1+1/rat))), with rat = τ²/σ²."""
    if rat < 0:
        raise ParameterError("rat must be nonnegative")
    if rat == 0:
        return 1.0
    return math.sqrt(1.0 / (1.0 + rat)) * math.exp(z * z / (2.0 * (1.0 + 1.0 / rat)))


def bayes_factor_two_sample_closed(xbar: float, ybar: float, s2_xy: float, n: int) -> float:
    """B21 for a shift ξ ~ N(0, σ²) between two normal samples of size n.

    With d = x̄ - ȳ the exact value is
    (2n+1)^{-1/2} [(d²/(2(2n+1)) + s²) / (d²/2 + s²)]^{-(n-1/2)},
    where s² is the pooled average of squared deviations.
    """
    if n < 1:
        raise ParameterError("n must be at least 1")
    if not s2_xy > 0:
        raise ParameterError("s2_xy must be positive")
    d2 = (xbar - ybar) ** 2
    c1 = d2 / (2 * (2 * n + 1)) + s2_xy
    c0 = d2 / 2 + s2_xy
    return math.exp(-(n - 0.5) * (math.log(c1) - math.log(c0)) - 0.5 * math.log(2 * n + 1))


@dataclass(frozen=True)
class ContingencyTable2x2:
    n11: int
    n12: int
    n21: int
    n22: int

    def __post_init__(self):
        cells = (self.n11, self.n12, self.n21, self.n22)
        if any(int(c) != c or c < 0 for c in cells) or sum(cells) < 1:
            raise ParameterError("cells must be nonnegative integers with a positive total")

    @property
    def cells(self) -> np.ndarray:
        return np.array([self.n11, self.n12, self.n21, self.n22], dtype=float)

    @property
    def n(self) -> int:
        return int(self.cells.sum())

    def transpose(self) -> "ContingencyTable2x2":
        return ContingencyTable2x2(self.n11, self.n21, self.n12, self.n22)


def contingency_log_marginal_full(t: ContingencyTable2x2) -> float:
    """log m(T) under a Dirichlet(½,½,½,½) prior on the cell probabilities."""
    c = t.cells
    return float(np.sum(special.gammaln(c + 0.5) - special.gammaln(c + 1))
                 - math.log(t.n + 1) - 2 * math.log(math.pi))


def _margins(t):
    return t.n11 + t.n12, t.n11 + t.n21


def contingency_log_marginal_null(t: ContingencyTable2x2) -> float:
    """Null marginal as the closed form
    [(r+1)(n-r+1)/((n+2)(n+1))] [(c+1)(n-c+1)/((n+2)(n+1))], r, c the first margins.
    """
    n = t.n
    r, c = _margins(t)
    den = 2 * (math.log(n + 2) + math.log(n + 1))
    return (math.log(r + 1) + math.log(n - r + 1) + math.log(c + 1) + math.log(n - c + 1) - den)


def contingency_bayes_factor(t: ContingencyTable2x2) -> float:
    """B01 = m0(T)/m(T) for independence in a 2x2 table with fixed total."""
    return math.exp(contingency_log_marginal_null(t) - contingency_log_marginal_full(t))


def contingency_bayes_factor_multinomial(t: ContingencyTable2x2) -> float:
    """B01 with the null marginal integrated exactly.

    Under independence the multinomial likelihood factorizes as
    n!/∏n_ij! α^r (1-α)^{n-r} β^c (1-β)^{n-c}; with uniform α, β this gives
    n!/∏n_ij! B(r+1, n-r+1) B(c+1, n-c+1).
    """
    n = t.n
    r, c = _margins(t)
    log_m0 = (special.gammaln(n + 1) - np.sum(special.gammaln(t.cells + 1))
              + special.betaln(r + 1, n - r + 1) + special.betaln(c + 1, n - c + 1))
    return math.exp(float(log_m0) - contingency_log_marginal_full(t))
