"""Bayesian computation toolkit: conjugate analysis, Monte Carlo, MCMC,
mixtures, capture-recapture, time series and Markov random fields."""

from . import capture, conjugate, dist, errors, fields, mcmc, mixtures, montecarlo, timeseries
from .dist import DEFAULT_SEED, make_rng, spawn_rngs
from .errors import (BayesDeskError, BudgetError, NumericGuardError, ParameterError,
                     SupportError)

__version__ = "0.1.0"

__all__ = [
    "capture", "conjugate", "dist", "errors", "fields", "mcmc", "mixtures", "montecarlo",
    "timeseries", "DEFAULT_SEED", "make_rng", "spawn_rngs", "BayesDeskError", "BudgetError",
    "NumericGuardError", "ParameterError", "SupportError",
]
