"""Small linear-algebra facade so that tolerances live in one place."""

import numpy as np
from scipy import linalg

from .errors import ParameterError, SingularityError

SPD_RTOL = 1e-10
SYMMETRY_TOL = 1e-10


def as_matrix(a, name="matrix"):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.ndim != 2:
        raise ParameterError(f"{name} must be two-dimensional")
    return a


def check_symmetric(a, name="matrix"):
    scale = max(1.0, float(np.max(np.abs(a))))
    if a.shape[0] != a.shape[1] or np.max(np.abs(a - a.T)) > SYMMETRY_TOL * scale:
        raise ParameterError(f"{name} must be symmetric")


def cholesky(a, name="matrix"):
    """Lower Cholesky factor; raises if ``a`` is not numerically SPD."""
    check_symmetric(a, name)
    try:
        c = linalg.cholesky(a, lower=True)
    except linalg.LinAlgError as exc:
        raise SingularityError(f"{name} is not positive definite") from exc
    d = np.diag(c)
    if d.min() <= np.sqrt(SPD_RTOL) * d.max():
        raise SingularityError(f"{name} is numerically singular")
    return c


def solve_spd(a, b, name="matrix"):
    c = cholesky(a, name)
    return linalg.cho_solve((c, True), b)


def inv_spd(a, name="matrix"):
    return solve_spd(a, np.eye(a.shape[0]), name)


def logdet_spd(a, name="matrix"):
    return 2.0 * float(np.sum(np.log(np.diag(cholesky(a, name)))))


def eigh(a, name="matrix"):
    check_symmetric(a, name)
    return linalg.eigh(a)


def gram(X, name="X"):
    """X'X, checked for full column rank."""
    X = as_matrix(X, name)
    n, p = X.shape
    if n < p:
        raise SingularityError(f"{name} has fewer rows than columns")
    s = linalg.svdvals(X)
    if s.min() <= SPD_RTOL * s.max() * max(n, p):
        raise SingularityError(f"{name} is rank deficient")
    return X.T @ X
