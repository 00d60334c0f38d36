"""AR, MA and hidden Markov tools.

AR(1) posteriors use the flat prior π(ρ, σ²) ∝ 1/σ² and condition on x0.
Lag polynomials are stored as 1 - ρ1 u - ... - ρp u^p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import special

from . import dist
from .errors import BoundaryRootError, DivergenceError, ParameterError, SingularityError

BOUNDARY_TOL = 1e-12


# AR(1) -------------------------------------------------------------------

@dataclass(frozen=True)
class ArPosterior:
    """Posterior summaries for an AR(1) series x0, ..., xT.

    ρ | σ², x ~ N(mu_T, σ²/sxx) and ρ | x ~ T(T-1, mu_T, nu2_T).
    """

    mu_T: float
    nu2_T: float
    T: int
    sxx: float
    x_last: float

    def omega2_T(self, sigma2: float) -> float:
        return sigma2 / self.sxx

    def marginal(self) -> dist.ScalarDistribution:
        return dist.student_t(self.T - 1, self.mu_T, self.nu2_T)

    def marginal_logpdf(self, rho):
        return dist.student_t_logpdf(rho, self.T - 1, self.mu_T, self.nu2_T)

    @property
    def delta_T(self) -> float:
        """Predictive center for x_{T+1}."""
        return self.mu_T * self.x_last

    def predictive(self) -> dist.ScalarDistribution:
        """x_{T+1} | x ~ T(T-1, mu_T x_T, nu2_T (sxx + x_T²))."""
        return dist.student_t(self.T - 1, self.delta_T, self.nu2_T * (self.sxx + self.x_last**2))


def ar1_posterior(x: Sequence[float]) -> ArPosterior:
    """Closed-form AR(1) posterior from x = (x0, x1, ..., xT).

    mu_T = Σ x_{t-1} x_t / Σ x_{t-1}², and
    nu2_T = (Σ x_t² / Σ x_{t-1}² - mu_T²) / (T - 1).
    """
    x = np.asarray(x, dtype=float)
    T = x.size - 1
    if T < 2:
        raise ParameterError("need T >= 2 observations after x0")
    prev, cur = x[:-1], x[1:]
    sxx = float(prev @ prev)
    if sxx == 0:
        raise SingularityError("all lagged values are zero")
    mu = float(prev @ cur) / sxx
    nu2 = (float(cur @ cur) / sxx - mu * mu) / (T - 1)
    return ArPosterior(mu, nu2, T, sxx, float(x[-1]))


# Lag polynomials ---------------------------------------------------------

@dataclass(frozen=True)
class LagPolynomial:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if c.size == 0 or c[0] != 1.0:
            raise ParameterError("lag polynomials have constant term 1")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_rho(cls, rho: Sequence[float]) -> "LagPolynomial":
        return cls(np.concatenate([[1.0], -np.asarray(rho, dtype=float)]))

    @property
    def rho(self) -> np.ndarray:
        return -self.coeffs[1:]

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def roots(self) -> np.ndarray:
        """Roots in u, from companion-matrix eigenvalues."""
        c = np.trim_zeros(self.coeffs, "b")
        if c.size <= 1:
            return np.empty(0, dtype=complex)
        return np.roots(c[::-1])


def _pair_roots(lambdas):
    lam = np.asarray(lambdas, dtype=complex)
    real = lam[np.abs(lam.imag) <= 1e-12].real
    cplx = lam[np.abs(lam.imag) > 1e-12]
    upper = np.sort_complex(cplx[cplx.imag > 0])
    lower = np.sort_complex(np.conj(cplx[cplx.imag < 0]))
    if upper.size != lower.size or not np.allclose(upper, lower, atol=1e-10):
        raise ParameterError("complex roots must come in conjugate pairs")
    return real, upper


def ar_coeffs_from_roots(lambdas: Sequence[complex]) -> LagPolynomial:
    """Coefficients of Π(1 - λ_i u) built one factor at a time.

    Each real λ multiplies by (1 - λu) and each conjugate pair by
    1 - 2 Re(λ) u + |λ|² u², so the arithmetic stays real; O(p²) overall.
    """
    real, pairs = _pair_roots(lambdas)
    c = np.array([1.0])
    for lam in real:
        c = np.concatenate([c, [0.0]]) - lam * np.concatenate([[0.0], c])
    for lam in pairs:
        quad = np.array([1.0, -2 * lam.real, abs(lam) ** 2])
        c = np.convolve(c, quad)
    return LagPolynomial(c)


class SchurResult(NamedTuple):
    all_outside: bool
    path: list


def schur_transform(coeffs: np.ndarray) -> np.ndarray:
    """(P - a P*)/(1 - a²) with a = P*(0) the leading coefficient.

    P* reverses the coefficients; the result has constant term 1 and
    degree below that of P, with trailing zeros trimmed.
    """
    c = np.asarray(coeffs, dtype=float)
    a = c[-1]
    if abs(abs(a) - 1.0) < BOUNDARY_TOL:
        raise BoundaryRootError("|P*(0)| = 1: a root lies on the unit circle")
    t = (c - a * c[::-1]) / (1.0 - a * a)
    t = t[:-1]
    while t.size > 1 and abs(t[-1]) < 1e-14:
        t = t[:-1]
    return t


def schur_root_test(poly: LagPolynomial) -> SchurResult:
    """Decide whether every root of ``poly`` lies outside the unit circle.

    While |P*(0)| < 1 the transform keeps the number of roots inside the
    disc (Rouché on |u| = 1, where |P*| = |P|), and lowers the degree.  The
    test succeeds iff it reaches a constant without meeting |P*(0)| >= 1.
    """
    c = np.trim_zeros(poly.coeffs, "b")
    path = [c]
    while c.size > 1:
        if abs(c[-1]) > 1.0 + BOUNDARY_TOL:
            return SchurResult(False, path)
        c = schur_transform(c)
        path.append(c)
    return SchurResult(True, path)


def ar2_causality(rho1: float, rho2: float) -> bool:
    """Both roots of 1 - ρ1 u - ρ2 u² outside the unit circle (stationarity triangle)."""
    return bool(rho1 + rho2 < 1 and rho2 - rho1 < 1 and abs(rho2) < 1)


def ma_autocovariance(thetas: Sequence[float], sigma2: float, s: int) -> float:
    """γ(s) = σ² Σ_i ϑ_i ϑ_{i+|s|} with ϑ0 = 1, for x_t = ε_t + Σ ϑ_j ε_{t-j}."""
    th = np.concatenate([[1.0], np.asarray(thetas, dtype=float)])
    s = abs(int(s))
    if s >= th.size:
        return 0.0
    return float(sigma2 * th[: th.size - s] @ th[s:])


def ma_noise_recursion(x: Sequence[float], mu: float, thetas: Sequence[float], i: int,
                       eps_init: Sequence[float]):
    """Write ε̂_t = δ_t + β_t ε_i for t = 1..T.

    ε̂_t = x_t - μ + Σ_j ϑ_j ε̂_{t-j} with ε̂_s = ε_s for s <= 0;
    ``eps_init`` holds (ε0, ε_{-1}, ..., ε_{-q+1}) and entry ``-i`` is the
    free one.  Then δ_t = x_t - μ + Σ ϑ_j δ_{t-j} and β_t = Σ ϑ_j β_{t-j}.
    """
    th = np.asarray(thetas, dtype=float)
    q = th.size
    e0 = np.asarray(eps_init, dtype=float)
    if e0.size != q or not -q < i <= 0:
        raise ParameterError("need q initial noises and -q < i <= 0")
    x = np.asarray(x, dtype=float)
    T = x.size
    # index q + s - 1 holds time s, for s = -q+1..T
    delta = np.zeros(T + q)
    beta = np.zeros(T + q)
    delta[:q] = e0[::-1]
    delta[q + i - 1] = 0.0
    beta[q + i - 1] = 1.0
    for t in range(1, T + 1):
        k = q + t - 1
        past = slice(k - q, k)
        delta[k] = x[t - 1] - mu + th @ delta[past][::-1]
        beta[k] = th @ beta[past][::-1]
    return delta[q:], beta[q:]


def companion_matrix(rho: Sequence[float]) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    p = rho.size
    B = np.zeros((p, p))
    B[0] = rho
    B[1:, :-1] = np.eye(p - 1)
    return B


def ar_stationary_covariance(B: np.ndarray, sigma2: float, tol: float = 1e-12,
                             max_iter: int = 1_000_000) -> np.ndarray:
    """Solve A = BAB' + V with V = σ² e1 e1' by fixed-point iteration from A = V."""
    B = np.atleast_2d(np.asarray(B, dtype=float))
    p = B.shape[0]
    char = np.poly(B)  # z^p + c1 z^{p-1} + ... ; reversed gives det(I - Bu)
    try:
        ok = schur_root_test(LagPolynomial(np.real(char))).all_outside
    except BoundaryRootError:
        ok = False
    if not ok:
        raise DivergenceError("B has spectral radius >= 1; no stationary covariance")
    V = np.zeros((p, p))
    V[0, 0] = sigma2
    A = V.copy()
    for _ in range(max_iter):
        nxt = B @ A @ B.T + V
        if np.max(np.abs(nxt - A)) < tol:
            return nxt
        A = nxt
    raise DivergenceError("fixed-point iteration did not converge")


# Hidden Markov -----------------------------------------------------------

@dataclass(frozen=True)
class HmmSpec:
    """Markov-switching model.

    ``log_emission(x_prev, x)`` returns log f(x | x_prev, y = i) for every
    state i as a length-κ array.
    """

    transition: np.ndarray
    log_emission: Callable[[float, float], np.ndarray]

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.transition, dtype=float))
        if P.shape[0] != P.shape[1] or np.any(P < 0) or not np.allclose(P.sum(axis=1), 1, atol=1e-12):
            raise ParameterError("transition must be a square row-stochastic matrix")
        object.__setattr__(self, "transition", P)

    @property
    def states(self) -> int:
        return self.transition.shape[0]


class ForwardResult(NamedTuple):
    loglik: float
    phi: np.ndarray
    failed_at: int | None


def hmm_forward_loglik(spec: HmmSpec, x: Sequence[float], initial: Sequence[float]) -> ForwardResult:
    """Forward filter; x[0] is the conditioning value.

    φ_r is the predictive law of y_r given x_{1:r-1}; each step adds
    log Σ_i f(x_r | x_{r-1}, y_r = i) φ_r(i) to the log-likelihood.
    A zero-likelihood step returns -inf with its index in ``failed_at``.
    """
    init = np.asarray(initial, dtype=float)
    if init.size != spec.states or np.any(init < 0) or abs(init.sum() - 1) > 1e-12:
        raise ParameterError("initial must be a distribution over the states")
    x = np.asarray(x, dtype=float)
    T = x.size - 1
    phi = np.empty((T, spec.states))
    cur = init
    ll = 0.0
    for r in range(1, T + 1):
        phi[r - 1] = cur
        le = np.asarray(spec.log_emission(x[r - 1], x[r]), dtype=float)
        with np.errstate(divide="ignore"):
            lw = le + np.log(cur)
        lc = special.logsumexp(lw)
        if not np.isfinite(lc):
            return ForwardResult(-math.inf, phi[:r], r)
        ll += lc
        cur = np.exp(lw - lc) @ spec.transition
        cur = cur / cur.sum()
    return ForwardResult(float(ll), phi, None)
