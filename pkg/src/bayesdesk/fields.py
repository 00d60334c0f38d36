"""Potts and Ising fields on rectangular lattices.

π(x) ∝ exp(β Σ_{i~j} I(x_i = x_j)) with the sum over unordered neighbor
pairs.  Adjacency is the true lattice adjacency, with no wrap-around.
Samplers work on stacks of lattices shaped (chains, rows, cols).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import special

from .errors import BudgetError, IncompatibleConditionalsError, ParameterError

ENUMERATION_LIMIT = 2**26
NEIGHBORHOODS = ("four", "eight")
SCHEDULES = ("random_scan", "two_color")


@dataclass(frozen=True)
class Lattice:
    labels: np.ndarray
    neighborhood: str = "four"

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 2 or min(lab.shape) < 1:
            raise ParameterError("labels must be a nonempty rows x cols matrix")
        if not np.issubdtype(lab.dtype, np.integer) or lab.min() < 0:
            raise ParameterError("labels must be nonnegative integers")
        if self.neighborhood not in NEIGHBORHOODS:
            raise ParameterError(f"neighborhood must be one of {NEIGHBORHOODS}")
        object.__setattr__(self, "labels", lab.astype(np.int64))

    @property
    def rows(self) -> int:
        return self.labels.shape[0]

    @property
    def cols(self) -> int:
        return self.labels.shape[1]

    def energy(self) -> int:
        return int(agreements(self.labels[None], self.neighborhood)[0])

    def to_text(self) -> str:
        return "\n".join(" ".join(str(v) for v in row) for row in self.labels) + "\n"

    @classmethod
    def from_text(cls, text: str, neighborhood: str = "four") -> "Lattice":
        rows = [list(map(int, line.split())) for line in text.strip().splitlines() if line.strip()]
        if len({len(r) for r in rows}) != 1:
            raise ParameterError("ragged lattice text")
        return cls(np.array(rows), neighborhood)


@dataclass
class FieldPosteriorSample:
    states: np.ndarray  # (n, rows, cols)
    beta: float
    G: int

    def __post_init__(self):
        self.states = np.asarray(self.states)
        if self.states.ndim == 2:
            self.states = self.states[None]
        if self.states.shape[0] < 1 or self.states.min() < 0 or self.states.max() >= self.G:
            raise ParameterError("need at least one state with labels in 0..G-1")


# Geometry ----------------------------------------------------------------

def _offsets(neighborhood):
    # one direction per unordered pair
    if neighborhood == "four":
        return [(0, 1), (1, 0)]
    if neighborhood == "eight":
        return [(0, 1), (1, 0), (1, 1), (1, -1)]
    raise ParameterError(f"neighborhood must be one of {NEIGHBORHOODS}")


def edge_list(rows: int, cols: int, neighborhood: str = "four") -> np.ndarray:
    """Unordered neighbor pairs as flat site indices, shape (E, 2)."""
    edges = []
    for dr, dc in _offsets(neighborhood):
        for r in range(rows):
            for c in range(cols):
                r2, c2 = r + dr, c + dc
                if 0 <= r2 < rows and 0 <= c2 < cols:
                    edges.append((r * cols + c, r2 * cols + c2))
    return np.array(edges, dtype=np.int64).reshape(-1, 2)


def neighbor_lists(rows: int, cols: int, neighborhood: str = "four") -> list:
    nb = [[] for _ in range(rows * cols)]
    for a, b in edge_list(rows, cols, neighborhood):
        nb[a].append(b)
        nb[b].append(a)
    return [np.array(v, dtype=np.int64) for v in nb]


def agreements(X: np.ndarray, neighborhood: str = "four") -> np.ndarray:
    """Σ_{i~j} I(x_i = x_j) for each lattice in a (K, rows, cols) stack."""
    X = np.asarray(X)
    K, R, C = X.shape
    out = np.zeros(K, dtype=np.int64)
    for dr, dc in _offsets(neighborhood):
        a = X[:, : R - dr, max(0, -dc): C - max(0, dc)]
        b = X[:, dr:, max(0, dc): C - max(0, -dc)]
        out += (a == b).reshape(K, -1).sum(axis=1)
    return out


def clique_count_eight(rows: int, cols: int) -> int:
    """Number of 2x2 cliques of the eight-neighbor grid."""
    if rows < 1 or cols < 1:
        raise ParameterError("rows and cols must be positive")
    return (rows - 1) * (cols - 1)


# Gibbs sampling ----------------------------------------------------------

def _neighbor_counts(X, G):
    """counts[k, r, c, g] = number of four-neighbors of (r, c) labelled g."""
    onehot = (X[..., None] == np.arange(G)).astype(np.int64)
    cnt = np.zeros_like(onehot)
    cnt[:, 1:] += onehot[:, :-1]
    cnt[:, :-1] += onehot[:, 1:]
    cnt[:, :, 1:] += onehot[:, :, :-1]
    cnt[:, :, :-1] += onehot[:, :, 1:]
    return cnt


def two_color_masks(rows: int, cols: int) -> tuple[np.ndarray, np.ndarray]:
    """Even- and odd-parity site masks, updated in that order by ``two_color``."""
    parity = np.add.outer(np.arange(rows), np.arange(cols)) % 2
    return parity == 0, parity == 1


def sweep_batch(X: np.ndarray, beta, G: int, rng: np.random.Generator,
                schedule: str = "random_scan", neighborhood: str = "four") -> np.ndarray:
    """One sweep on every lattice of the stack X (modified in place and returned).

    Each site is redrawn from P(x_i = g | rest) ∝ exp(β n_{i,g}), where n_{i,g}
    counts neighbors labelled g.  ``random_scan`` visits rows in a random
    order and, within each, columns in a random order; ``two_color`` updates
    all even-parity sites, then all odd ones, which are conditionally
    independent under four-neighbor adjacency.
    ``beta`` may be a scalar or one value per lattice.
    """
    K, rows, cols = X.shape
    b = np.broadcast_to(np.asarray(beta, dtype=float), (K,))
    if schedule == "two_color":
        if neighborhood != "four":
            raise ParameterError("two_color needs the four-neighborhood")
        for mask in two_color_masks(rows, cols):
            cnt = _neighbor_counts(X, G)[:, mask]  # (K, m, G)
            logits = b[:, None, None] * cnt + rng.gumbel(size=cnt.shape)
            X[:, mask] = np.argmax(logits, axis=-1)
        return X
    if schedule != "random_scan":
        raise ParameterError(f"schedule must be one of {SCHEDULES}")
    flat = X.reshape(K, -1)
    nb = neighbor_lists(rows, cols, neighborhood)
    labels = np.arange(G)
    order = (rng.permutation(rows)[:, None] * cols + rng.permutation(cols)[None, :]).ravel()
    for i in order:
        cnt = (flat[:, nb[i], None] == labels).sum(axis=1)
        logits = b[:, None] * cnt + rng.gumbel(size=(K, G))
        flat[:, i] = np.argmax(logits, axis=-1)
    return X


def gibbs_sweep(lattice: Lattice, beta: float, G: int, rng: np.random.Generator,
                schedule: str = "random_scan") -> Lattice:
    if lattice.labels.max() >= G:
        raise ParameterError("labels must lie in 0..G-1")
    X = lattice.labels[None].copy()
    sweep_batch(X, beta, G, rng, schedule, lattice.neighborhood)
    return Lattice(X[0], lattice.neighborhood)


def gibbs_chains(rows: int, cols: int, G: int, beta, sweeps: int, rng: np.random.Generator,
                 chains: int = 1, schedule: str = "random_scan", neighborhood: str = "four",
                 burn: int = 0, init: np.ndarray | None = None) -> np.ndarray:
    """States after each sweep past ``burn``, shaped (sweeps - burn, chains, rows, cols)."""
    if init is None:
        X = rng.integers(G, size=(chains, rows, cols))
    else:
        X = np.broadcast_to(np.asarray(init), (chains, rows, cols)).copy()
    out = np.empty((sweeps - burn, chains, rows, cols), dtype=np.int8 if G < 128 else np.int64)
    for s in range(sweeps):
        sweep_batch(X, beta, G, rng, schedule, neighborhood)
        if s >= burn:
            out[s - burn] = X
    return out


def sample_field(lattice: Lattice, beta: float, G: int, sweeps: int, rng: np.random.Generator,
                 schedule: str = "random_scan", burn: int = 0) -> FieldPosteriorSample:
    st = gibbs_chains(lattice.rows, lattice.cols, G, beta, sweeps, rng, 1, schedule,
                      lattice.neighborhood, burn, lattice.labels)
    return FieldPosteriorSample(st[:, 0], beta, G)


# Exact enumeration -------------------------------------------------------

def _guard(G, sites):
    if G ** sites > ENUMERATION_LIMIT:
        raise ParameterError(f"G^(rows*cols) = {G}^{sites} exceeds the enumeration limit 2^26")


def enumerate_configs(rows: int, cols: int, G: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Configurations with flat index start..stop-1 (base-G digits, first site most significant)."""
    n = rows * cols
    _guard(G, n)
    stop = G**n if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)
    powers = G ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] // powers) % G).astype(np.int8)


def energy_histogram(rows: int, cols: int, G: int, neighborhood: str = "four",
                     chunk: int = 1 << 20) -> np.ndarray:
    """counts[e] = number of configurations with e agreeing neighbor pairs.

    One pass over the G^(rows cols) configurations in chunks, O(E G^(rows cols)).
    """
    n = rows * cols
    _guard(G, n)
    edges = edge_list(rows, cols, neighborhood)
    counts = np.zeros(edges.shape[0] + 1, dtype=np.int64)
    total = G**n
    for s in range(0, total, chunk):
        cfg = enumerate_configs(rows, cols, G, s, min(total, s + chunk))
        e = (cfg[:, edges[:, 0]] == cfg[:, edges[:, 1]]).sum(axis=1) if edges.size else np.zeros(len(cfg), int)
        counts += np.bincount(e, minlength=counts.size)
    return counts


def exact_partition(rows: int, cols: int, G: int, beta, neighborhood: str = "four"):
    """log Σ_x exp(β Σ agreements); ``beta`` may be an array."""
    h = energy_histogram(rows, cols, G, neighborhood)
    e = np.flatnonzero(h)
    b = np.asarray(beta, dtype=float)
    out = special.logsumexp(np.multiply.outer(b, e) + np.log(h[e]), axis=-1)
    return float(out) if out.ndim == 0 else out


def exact_partition_reciprocal(rows: int, cols: int, G: int, beta, neighborhood: str = "four"):
    """1 / Σ_x exp(β Σ agreements), the normalizing constant of the unnormalized density."""
    return np.exp(-np.asarray(exact_partition(rows, cols, G, beta, neighborhood)))


def exact_state_law(rows: int, cols: int, G: int, beta: float, neighborhood: str = "four"):
    """All configurations (flat, shape (G^n, n)) and their probabilities."""
    cfg = enumerate_configs(rows, cols, G)
    e = agreements(cfg.reshape(-1, rows, cols), neighborhood)
    lw = beta * e
    return cfg, np.exp(lw - special.logsumexp(lw))


def state_codes(states: np.ndarray, G: int) -> np.ndarray:
    """Flat enumeration index of each lattice in a (..., rows, cols) array."""
    s = np.asarray(states, dtype=np.int64)
    n = s.shape[-1] * s.shape[-2]
    flat = s.reshape(-1, n)
    return flat @ (G ** np.arange(n - 1, -1, -1, dtype=np.int64))


def two_beta_tables(beta: float) -> tuple[np.ndarray, np.ndarray]:
    """1x2 Ising laws under exp(β Σ I(x_i = x_j)) and exp(2β Σ I(x_i = x_j = 1)).

    States are ordered (0,0), (0,1), (1,0), (1,1).  The two tables differ,
    which shows that the second form is not a rewrite of the first.
    """
    cfg = enumerate_configs(1, 2, 2)
    a = np.exp(beta * (cfg[:, 0] == cfg[:, 1]))
    b = np.exp(2 * beta * ((cfg[:, 0] == 1) & (cfg[:, 1] == 1)))
    return a / a.sum(), b / b.sum()


# Conditionals and Hammersley-Clifford ------------------------------------

def potts_conditional(rows: int, cols: int, G: int, beta: float,
                      neighborhood: str = "four") -> Callable[[int, np.ndarray], np.ndarray]:
    """Site conditional evaluator: (i, configs (m, n)) -> (m, G) probabilities."""
    nb = neighbor_lists(rows, cols, neighborhood)
    labels = np.arange(G)

    def cond(i, cfg):
        cnt = (cfg[:, nb[i], None] == labels).sum(axis=1)
        lw = beta * cnt
        return np.exp(lw - special.logsumexp(lw, axis=1, keepdims=True))
    return cond


def hc_joint_reconstruction(conditional: Callable[[int, np.ndarray], np.ndarray], reference,
                            shape: tuple[int, int], G: int) -> np.ndarray:
    """Joint table from site conditionals by the telescoping product.

    π(x)/π(x*) = Π_i π_i(x_i | x_{<i}, x*_{>i}) / π_i(x*_i | x_{<i}, x*_{>i}),
    evaluated for every configuration in enumeration order and normalized.
    """
    rows, cols = shape
    cfg = enumerate_configs(rows, cols, G).astype(np.int64)
    ref = np.asarray(reference, dtype=np.int64).ravel()
    if ref.size != rows * cols:
        raise ParameterError("reference has the wrong size")
    logr = np.zeros(len(cfg))
    mixed = np.broadcast_to(ref, cfg.shape).copy()
    idx = np.arange(len(cfg))
    for i in range(rows * cols):
        p = np.asarray(conditional(i, mixed), dtype=float)
        num, den = p[idx, cfg[:, i]], p[idx, ref[i]]
        if np.any(num <= 0) or np.any(den <= 0):
            raise IncompatibleConditionalsError(f"conditional of site {i} vanishes on the support")
        logr += np.log(num) - np.log(den)
        mixed[:, i] = cfg[:, i]
    return np.exp(logr - special.logsumexp(logr))


# Estimators --------------------------------------------------------------

def mpm_estimate(samples: FieldPosteriorSample) -> Lattice:
    """Per-site most frequent label; ties go to the smallest label."""
    st = samples.states
    counts = (st[..., None] == np.arange(samples.G)).sum(axis=0)
    return Lattice(np.argmax(counts, axis=-1))


def map_estimate(samples: FieldPosteriorSample, neighborhood: str = "four",
                 log_density: Callable[[np.ndarray], np.ndarray] | None = None) -> Lattice:
    """Visited state with the highest unnormalized density (β · agreements by default)."""
    st = samples.states
    ld = samples.beta * agreements(st, neighborhood) if log_density is None else log_density(st)
    return Lattice(st[int(np.argmax(ld))], neighborhood)


def l4_risk(labels, pair_prob) -> float:
    """Σ_{i<j, x̂_i = x̂_j} (1 - P(x_i = x_j))."""
    lab = np.asarray(labels)
    P = np.asarray(pair_prob, dtype=float)
    same = lab[:, None] == lab[None, :]
    return float(np.sum(np.triu(same * (1 - P), 1)))


class L4Result(NamedTuple):
    labels: np.ndarray
    risk: float
    start_risks: np.ndarray
    final_risks: np.ndarray


def _l4_descent(lab, P, G, rng, max_pass):
    n = lab.size
    for _ in range(max_pass):
        changed = False
        for i in rng.permutation(n):
            cost = np.zeros(G)
            others = np.arange(n) != i
            np.add.at(cost, lab[others], 1 - P[i, others])
            best = int(np.argmin(cost))
            if cost[best] < cost[lab[i]] - 1e-12:
                lab[i] = best
                changed = True
        if not changed:
            break
    return lab


def l4_clustering(pair_prob, G: int, rng: np.random.Generator, starts: int = 10,
                  max_pass: int = 1000) -> L4Result:
    """Local minimization of the L4 risk by single-site reallocation.

    Moving site i to label a changes the risk by Σ_{j≠i, x̂_j=a}(1 - P_ij)
    minus the same sum at its current label, so each move lowers the risk
    and the scheme stops at a fixed configuration.  The best of ``starts``
    random starts is returned.
    """
    P = np.asarray(pair_prob, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or not np.allclose(P, P.T) or P.min() < 0 or P.max() > 1:
        raise ParameterError("pair_prob must be a symmetric matrix in [0, 1]")
    n = P.shape[0]
    best, s_risk, f_risk = None, [], []
    for _ in range(starts):
        lab = rng.integers(G, size=n)
        s_risk.append(l4_risk(lab, P))
        lab = _l4_descent(lab, P, G, rng, max_pass)
        f_risk.append(l4_risk(lab, P))
        if best is None or f_risk[-1] < l4_risk(best, P):
            best = lab.copy()
    return L4Result(best, l4_risk(best, P), np.array(s_risk), np.array(f_risk))


def piecewise_linear_integral(betas: Sequence[float], values: Sequence[float], a0: float, a1: float) -> float:
    """∫_{a0}^{a1} of the linear interpolant through (betas, values)."""
    b = np.asarray(betas, dtype=float)
    v = np.asarray(values, dtype=float)
    if b.size != v.size or b.size < 2 or np.any(np.diff(b) <= 0):
        raise ParameterError("need at least two strictly increasing knots")
    if not b[0] <= a0 < a1 <= b[-1]:
        raise ParameterError("integration range must lie within the knots")
    inner = b[(b > a0) & (b < a1)]
    x = np.concatenate([[a0], inner, [a1]])
    return float(np.trapezoid(np.interp(x, b, v), x))


# Threshold experiment ----------------------------------------------------

def _is_checkerboard(X):
    ok = np.ones(X.shape[0], dtype=bool)
    if X.shape[1] > 1:
        ok &= np.all(X[:, 1:] != X[:, :-1], axis=(1, 2))
    if X.shape[2] > 1:
        ok &= np.all(X[:, :, 1:] != X[:, :, :-1], axis=(1, 2))
    return ok


def beta_threshold_experiment(rows: int, cols: int, precision: float, sweeps: int, reps: int,
                              rng: np.random.Generator, direction: str = "positive",
                              schedule: str = "random_scan", max_beta: float = 100.0) -> np.ndarray:
    """|β| at which each two-color replication first becomes unicolor.

    β moves away from 0 by ``precision``; after ``sweeps`` sweeps at each
    value the lattice is checked, carrying the state forward.  The
    ``negative`` direction looks for a checkerboard instead.  Replications
    that never reach the target before ``max_beta`` report nan.
    """
    if not precision > 0:
        raise ParameterError("precision must be positive")
    if direction not in ("positive", "negative"):
        raise ParameterError("direction must be 'positive' or 'negative'")
    sign = 1.0 if direction == "positive" else -1.0
    X = rng.integers(2, size=(reps, rows, cols))
    out = np.full(reps, np.nan)
    step = 0
    while np.isnan(out).any():
        step += 1
        beta = step * precision
        if beta > max_beta + 1e-12:
            break
        for _ in range(sweeps):
            sweep_batch(X, sign * beta, 2, rng, schedule)
        if direction == "positive":
            hit = np.all(X.reshape(reps, -1) == X.reshape(reps, -1)[:, :1], axis=1)
        else:
            hit = _is_checkerboard(X)
        out[hit & np.isnan(out)] = beta
    return out


# ABC ---------------------------------------------------------------------

class AbcResult(NamedTuple):
    accepted: np.ndarray
    acceptance_rate: float
    proposals: int


def abc_posterior(simulate: Callable, prior_sample: Callable, stat: Callable, observed,
                  epsilon: float, n_props: int, rng: np.random.Generator,
                  distance: Callable | None = None) -> AbcResult:
    """Rejection ABC with vectorized callables.

    prior_sample(rng, n) -> θ (n, ...); simulate(θ, rng) -> data batch;
    stat(data) -> summaries (n, ...).  θ is kept when
    distance(summary, stat(observed)) <= epsilon; the default distance is
    Euclidean.  ε = 0 demands integer-valued summaries.
    """
    if epsilon < 0:
        raise ParameterError("epsilon must be nonnegative")
    theta = prior_sample(rng, n_props)
    s = np.asarray(stat(simulate(theta, rng)))
    s_obs = np.asarray(stat(np.asarray(observed)[None]))[0]
    if epsilon == 0 and not (np.issubdtype(s.dtype, np.integer) or np.all(s == np.round(s))):
        raise ParameterError("epsilon = 0 needs discrete summaries")
    if distance is None:
        diff = (s - s_obs).reshape(n_props, -1).astype(float)
        d = np.sqrt(np.sum(diff**2, axis=1))
    else:
        d = np.asarray(distance(s, s_obs))
    keep = d <= epsilon
    rate = float(keep.mean())
    if not keep.any():
        raise BudgetError(f"no proposal accepted out of {n_props}", acceptance_rate=0.0)
    return AbcResult(np.asarray(theta)[keep], rate, n_props)
