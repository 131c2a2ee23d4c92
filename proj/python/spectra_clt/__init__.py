"""Python front end for the spectra_clt C++ library."""

import json

from ._core import (
    MdeSolution,
    SpectraError,
    density,
    edelman_density,
    eigenvalues,
    linear_statistic,
    quantiles,
    sample,
    selftest,
    solve_m,
    variance,
)
from ._core import predict as _predict
from ._core import run_experiment as _run_experiment

__all__ = [
    "MdeSolution",
    "SpectraError",
    "density",
    "edelman_density",
    "eigenvalues",
    "linear_statistic",
    "predict",
    "quantiles",
    "run_experiment",
    "sample",
    "selftest",
    "solve_m",
    "variance",
]


def predict(f, kappa4=0.0, n=1):
    """Predicted mean, variance and term breakdown for test function `f`."""
    return json.loads(_predict(f, kappa4, n))


def run_experiment(config):
    """Run an experiment from a config dict (same keys as the JSON config files)."""
    return json.loads(_run_experiment(json.dumps(config)))
