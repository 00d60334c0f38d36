"""Scalar probability distributions with explicit, seeded random streams.

Every sampler takes a :class:`numpy.random.Generator` built on the
counter-based Philox bit generator.  There is no module-level RNG; use
:func:`make_rng` for a single stream and :func:`spawn_rngs` for independent
per-chain streams derived from one root seed.

Parameter conventions (fixed per family):

==============  ==========================================================
normal          (mean, variance)
gamma           (shape, rate)
inverse_gamma   (shape, scale); density ∝ x^{-shape-1} exp(-scale/x)
beta            (a, b)
student_t       (nu, location, squared scale)
cauchy          (location, scale)
binomial        (n, p)
poisson         (rate,)
dirichlet       (alpha_1, ..., alpha_k)
multinomial     (n, p_1, ..., p_k)
truncated_normal (mu, side) with unit variance, side = +1 (x > 0) or -1
==============  ==========================================================
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special, stats

from .errors import ParameterError

RngState = np.random.Generator

DEFAULT_SEED = 20090516

# Inverse-CDF truncation is used inside this band; outside it we switch to
# rejection, which stays accurate in the far tail.
_TRUNC_INVCDF_LIMIT = 6.0


def make_rng(seed: int = DEFAULT_SEED) -> np.random.Generator:
    """Return a Philox-backed generator for a 64-bit unsigned seed."""
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.Philox(seed))


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """Split a root seed into ``n`` independent Philox streams."""
    children = np.random.SeedSequence(int(seed)).spawn(int(n))
    return [np.random.Generator(np.random.Philox(c)) for c in children]


class Family(str, enum.Enum):
    NORMAL = "normal"
    GAMMA = "gamma"
    INVERSE_GAMMA = "inverse_gamma"
    BETA = "beta"
    STUDENT_T = "student_t"
    CAUCHY = "cauchy"
    BINOMIAL = "binomial"
    POISSON = "poisson"
    DIRICHLET = "dirichlet"
    MULTINOMIAL = "multinomial"
    TRUNCATED_NORMAL = "truncated_normal"


_DISCRETE = {Family.BINOMIAL, Family.POISSON, Family.MULTINOMIAL}
_VECTOR = {Family.DIRICHLET, Family.MULTINOMIAL}


def _positive(name, *values):
    for v in values:
        if not (np.isfinite(v) and v > 0):
            raise ParameterError(f"{name} parameters must be positive and finite, got {v!r}")


@dataclass(frozen=True)
class ScalarDistribution:
    """A tagged distribution family plus its parameter vector."""

    family: Family
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        _validate(self)

    @property
    def is_discrete(self) -> bool:
        return self.family in _DISCRETE

    def mean(self):
        """Analytic mean (``nan`` where undefined)."""
        f, p = self.family, self.params
        if f is Family.NORMAL:
            return p[0]
        if f is Family.GAMMA:
            return p[0] / p[1]
        if f is Family.INVERSE_GAMMA:
            return p[1] / (p[0] - 1) if p[0] > 1 else math.nan
        if f is Family.BETA:
            return p[0] / (p[0] + p[1])
        if f is Family.STUDENT_T:
            return p[1] if p[0] > 1 else math.nan
        if f is Family.CAUCHY:
            return math.nan
        if f is Family.BINOMIAL:
            return p[0] * p[1]
        if f is Family.POISSON:
            return p[0]
        if f is Family.DIRICHLET:
            a = np.array(p)
            return a / a.sum()
        if f is Family.MULTINOMIAL:
            return p[0] * np.array(p[1:])
        mu, side = p
        return side * (side * mu + _mills(side * mu))

    def var(self):
        """Analytic variance (``nan`` where undefined); marginal variances for vectors."""
        f, p = self.family, self.params
        if f is Family.NORMAL:
            return p[1]
        if f is Family.GAMMA:
            return p[0] / p[1] ** 2
        if f is Family.INVERSE_GAMMA:
            a, b = p
            return b * b / ((a - 1) ** 2 * (a - 2)) if a > 2 else math.nan
        if f is Family.BETA:
            a, b = p
            return a * b / ((a + b) ** 2 * (a + b + 1))
        if f is Family.STUDENT_T:
            nu, _, s2 = p
            return s2 * nu / (nu - 2) if nu > 2 else math.nan
        if f is Family.CAUCHY:
            return math.nan
        if f is Family.BINOMIAL:
            return p[0] * p[1] * (1 - p[1])
        if f is Family.POISSON:
            return p[0]
        if f is Family.DIRICHLET:
            a = np.array(p)
            a0 = a.sum()
            return a * (a0 - a) / (a0**2 * (a0 + 1))
        if f is Family.MULTINOMIAL:
            q = np.array(p[1:])
            return p[0] * q * (1 - q)
        mu, side = p
        m = side * mu
        lam = _mills(m)
        return 1.0 - lam * (lam + m)


def _mills(m):
    # phi(m) / Phi(m), evaluated in log space for large negative m
    return math.exp(stats.norm.logpdf(m) - special.log_ndtr(m))


def _validate(d: ScalarDistribution):
    f, p = d.family, d.params
    expected = {
        Family.NORMAL: 2, Family.GAMMA: 2, Family.INVERSE_GAMMA: 2, Family.BETA: 2,
        Family.STUDENT_T: 3, Family.CAUCHY: 2, Family.BINOMIAL: 2, Family.POISSON: 1,
        Family.TRUNCATED_NORMAL: 2,
    }
    if f in expected and len(p) != expected[f]:
        raise ParameterError(f"{f.value} takes {expected[f]} parameters, got {len(p)}")
    if f is Family.NORMAL:
        if not np.isfinite(p[0]):
            raise ParameterError("normal mean must be finite")
        _positive("normal variance", p[1])
    elif f in (Family.GAMMA, Family.INVERSE_GAMMA, Family.BETA):
        _positive(f.value, *p)
    elif f is Family.STUDENT_T:
        _positive("student_t nu/scale2", p[0], p[2])
    elif f is Family.CAUCHY:
        _positive("cauchy scale", p[1])
    elif f is Family.BINOMIAL:
        n, q = p
        if n < 0 or n != int(n) or not 0.0 <= q <= 1.0:
            raise ParameterError(f"binomial needs integer n >= 0 and p in [0,1], got {p}")
    elif f is Family.POISSON:
        if not (np.isfinite(p[0]) and p[0] >= 0):
            raise ParameterError("poisson rate must be nonnegative")
    elif f is Family.DIRICHLET:
        if len(p) < 2:
            raise ParameterError("dirichlet needs at least two components")
        _positive("dirichlet", *p)
    elif f is Family.MULTINOMIAL:
        if len(p) < 3:
            raise ParameterError("multinomial needs n and at least two probabilities")
        n, q = p[0], np.array(p[1:])
        if n < 0 or n != int(n) or np.any(q < 0) or np.any(q > 1):
            raise ParameterError("multinomial needs integer n >= 0 and probabilities in [0,1]")
        if abs(q.sum() - 1.0) > 1e-12:
            raise ParameterError(f"multinomial probabilities sum to {q.sum()!r}, not 1")
    elif f is Family.TRUNCATED_NORMAL:
        if not np.isfinite(p[0]) or p[1] not in (1.0, -1.0):
            raise ParameterError("truncated_normal needs finite mu and side +1/-1")


# Convenience constructors -------------------------------------------------

def normal(mean=0.0, var=1.0):
    return ScalarDistribution(Family.NORMAL, (mean, var))


def gamma(shape, rate=1.0):
    return ScalarDistribution(Family.GAMMA, (shape, rate))


def inverse_gamma(shape, scale=1.0):
    return ScalarDistribution(Family.INVERSE_GAMMA, (shape, scale))


def beta(a, b):
    return ScalarDistribution(Family.BETA, (a, b))


def student_t(nu, loc=0.0, scale2=1.0):
    return ScalarDistribution(Family.STUDENT_T, (nu, loc, scale2))


def cauchy(loc=0.0, scale=1.0):
    return ScalarDistribution(Family.CAUCHY, (loc, scale))


def binomial(n, p):
    return ScalarDistribution(Family.BINOMIAL, (n, p))


def poisson(rate):
    return ScalarDistribution(Family.POISSON, (rate,))


def dirichlet(alpha: Sequence[float]):
    return ScalarDistribution(Family.DIRICHLET, tuple(alpha))


def multinomial(n, probs: Sequence[float]):
    return ScalarDistribution(Family.MULTINOMIAL, (n, *probs))


def truncated_normal(mu, side="positive"):
    return ScalarDistribution(Family.TRUNCATED_NORMAL, (mu, _side_sign(side)))


def _side_sign(side):
    if side in ("positive", "+", 1, 1.0, True):
        return 1.0
    if side in ("negative", "-", -1, -1.0, False):
        return -1.0
    raise ParameterError(f"side must be 'positive' or 'negative', got {side!r}")


# Densities ---------------------------------------------------------------

def student_t_logpdf(x, nu, loc=0.0, scale2=1.0):
    """Log-density of T(nu, loc, scale2).

    Uses the normalizing constant Γ((ν+1)/2) / (σ √(νπ) Γ(ν/2)).
    """
    x = np.asarray(x, dtype=float)
    z2 = (x - loc) ** 2 / scale2
    return (special.gammaln((nu + 1) / 2) - special.gammaln(nu / 2)
            - 0.5 * np.log(nu * np.pi * scale2)
            - (nu + 1) / 2 * np.log1p(z2 / nu))


def log_pdf(d: ScalarDistribution, x):
    """Log-density (or log-pmf) of ``d`` at ``x``; ``-inf`` off the support.

    Scalar families broadcast over array ``x``.  Dirichlet and multinomial
    take a single vector.
    """
    f, p = d.family, d.params
    if f in _VECTOR:
        return _log_pdf_vector(d, np.asarray(x, dtype=float))
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if f is Family.NORMAL:
            out = stats.norm.logpdf(x, p[0], math.sqrt(p[1]))
        elif f is Family.GAMMA:
            out = stats.gamma.logpdf(x, p[0], scale=1.0 / p[1])
        elif f is Family.INVERSE_GAMMA:
            out = stats.invgamma.logpdf(x, p[0], scale=p[1])
        elif f is Family.BETA:
            out = stats.beta.logpdf(x, p[0], p[1])
        elif f is Family.STUDENT_T:
            out = student_t_logpdf(x, *p)
        elif f is Family.CAUCHY:
            out = stats.cauchy.logpdf(x, p[0], p[1])
        elif f is Family.BINOMIAL:
            out = stats.binom.logpmf(x, int(p[0]), p[1])
        elif f is Family.POISSON:
            out = stats.poisson.logpmf(x, p[0])
        else:
            mu, side = p
            y = side * x
            out = np.where(y > 0, stats.norm.logpdf(x, mu, 1.0) - special.log_ndtr(side * mu), -np.inf)
    out = np.where(np.isnan(out), -np.inf, out)
    return float(out) if out.ndim == 0 else out


def _log_pdf_vector(d, x):
    p = np.array(d.params)
    if d.family is Family.DIRICHLET:
        if x.shape != p.shape or np.any(x <= 0) or abs(x.sum() - 1) > 1e-12:
            return -math.inf
        return float(special.gammaln(p.sum()) - special.gammaln(p).sum()
                     + np.sum((p - 1) * np.log(x)))
    n, q = int(p[0]), p[1:]
    if (x.shape != q.shape or np.any(x < 0) or np.any(x != np.round(x))
            or x.sum() != n):
        return -math.inf
    with np.errstate(divide="ignore"):
        return float(special.gammaln(n + 1) - special.gammaln(x + 1).sum()
                     + np.sum(special.xlogy(x, q)))


# Sampling ----------------------------------------------------------------

def sample(d: ScalarDistribution, rng: np.random.Generator, size=None):
    """Draw from ``d`` using ``rng``."""
    f, p = d.family, d.params
    if f is Family.NORMAL:
        return rng.normal(p[0], math.sqrt(p[1]), size)
    if f is Family.GAMMA:
        return rng.gamma(p[0], 1.0 / p[1], size)
    if f is Family.INVERSE_GAMMA:
        return p[1] / rng.gamma(p[0], 1.0, size)
    if f is Family.BETA:
        return rng.beta(p[0], p[1], size)
    if f is Family.STUDENT_T:
        return p[1] + math.sqrt(p[2]) * rng.standard_t(p[0], size)
    if f is Family.CAUCHY:
        return p[0] + p[1] * rng.standard_cauchy(size)
    if f is Family.BINOMIAL:
        return rng.binomial(int(p[0]), p[1], size)
    if f is Family.POISSON:
        return rng.poisson(p[0], size)
    if f is Family.DIRICHLET:
        return rng.dirichlet(p, size)
    if f is Family.MULTINOMIAL:
        return rng.multinomial(int(p[0]), p[1:], size)
    mu, side = p
    return sample_truncated_normal(mu, side, rng, size)


def sample_truncated_normal(mu, side, rng: np.random.Generator, size=None):
    """Draw from N(mu, 1) restricted to x > 0 (``side='positive'``) or x < 0.

    ``mu`` and ``side`` broadcast against each other and ``size``.  The
    inverse-CDF construction is used for |mu| <= 6.  Below that band the
    positive-side problem is a far-tail draw, handled by exponential
    rejection; above it the truncation almost never binds and a plain
    rejection loop on N(mu, 1) is exact and cheap.
    """
    if isinstance(side, str) or np.ndim(side) == 0:
        sign = _side_sign(side if isinstance(side, str) else float(side))
    else:
        sign = np.where(np.asarray(side, dtype=float) > 0, 1.0, -1.0)
    mu = np.asarray(mu, dtype=float)
    shape = np.broadcast_shapes(np.shape(mu), np.shape(sign), () if size is None else
                                (size if isinstance(size, tuple) else (size,)))
    m = np.broadcast_to(sign * mu, shape).astype(float).ravel()
    out = np.empty_like(m)

    mid = np.abs(m) <= _TRUNC_INVCDF_LIMIT
    if mid.any():
        u = rng.random(mid.sum())
        # Y > -m with Y standard normal: Y = -ndtri(u * Phi(m))
        out[mid] = m[mid] - special.ndtri(u * special.ndtr(m[mid]))
    deep = m < -_TRUNC_INVCDF_LIMIT
    if deep.any():
        out[deep] = m[deep] + _tail_exponential(-m[deep], rng)
    shallow = m > _TRUNC_INVCDF_LIMIT
    if shallow.any():
        idx = np.flatnonzero(shallow)
        vals = m[idx] + rng.standard_normal(idx.size)
        bad = vals <= 0
        while bad.any():
            vals[bad] = m[idx[bad]] + rng.standard_normal(bad.sum())
            bad = vals <= 0
        out[idx] = vals
    res = np.broadcast_to(sign, shape).ravel() * out if np.ndim(sign) else sign * out
    res = res.reshape(shape)
    return float(res) if res.ndim == 0 else res


def _tail_exponential(a, rng):
    """Standard normal restricted to (a, inf) for large a (translated exponential)."""
    lam = 0.5 * (a + np.sqrt(a * a + 4.0))
    out = np.empty_like(a)
    todo = np.arange(a.size)
    while todo.size:
        z = a[todo] + rng.exponential(1.0, todo.size) / lam[todo]
        ok = rng.random(todo.size) <= np.exp(-0.5 * (z - lam[todo]) ** 2)
        out[todo[ok]] = z[ok]
        todo = todo[~ok]
    return out


# Analytic helpers --------------------------------------------------------

class InverseGammaMoments(NamedTuple):
    mean: float | None  # None when shape <= 1
    mode: float


def inverse_gamma_moments(a: float, b: float) -> InverseGammaMoments:
    """Mean b/(a-1) (undefined for a <= 1) and mode b/(a+1) of IG(a, b)."""
    _positive("inverse gamma", a, b)
    return InverseGammaMoments(b / (a - 1) if a > 1 else None, b / (a + 1))


def fisher_info_normal(sigma2: float) -> np.ndarray:
    """Fisher information of N(θ, σ²) in (θ, σ²): diag(1/σ², 1/(2σ⁴)).

    Its determinant is 1/(2σ⁶), so Jeffreys' prior is ∝ σ^{-3}.
    """
    _positive("sigma2", sigma2)
    return np.diag([1.0 / sigma2, 1.0 / (2.0 * sigma2**2)])
