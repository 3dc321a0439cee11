"""Estimator-style wrappers around the functional identification/tuning API.

These follow the scikit-learn conventions (``fit`` returns self, learned
state lands in trailing-underscore attributes, constructor arguments are
stored verbatim) so the toolkit slots into sklearn pipelines and
``clone``/``get_params`` based tooling. The functional API underneath stays
the canonical entry point.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from . import ctrl_design, sysid_freq, sysid_time
from ._validation import as_complex_vector, as_float_vector
from .fotf import FrequencyResponse
from .orders import RationalOrder

__all__ = ["DiscreteTfEstimator", "LevyEstimator", "HyperdampedTuner"]


class DiscreteTfEstimator(BaseEstimator):
    """Discrete transfer-function identification (ARX or iterative PEM).

    Parameters mirror :class:`fracid.sysid_time.EstimatorSpec`. ``fit``
    takes ``X`` as the input sequence u and ``y`` as the output sequence,
    both 1-D and uniformly sampled at ``ts`` seconds.
    """

    def __init__(self, structure="arx", na=2, nb=2, nc=0, nd=0, nf=0, nk=1,
                 ts=0.1, max_iter=100):
        self.structure = structure
        self.na = na
        self.nb = nb
        self.nc = nc
        self.nd = nd
        self.nf = nf
        self.nk = nk
        self.ts = ts
        self.max_iter = max_iter

    def _spec(self):
        return sysid_time.EstimatorSpec(
            structure=str(self.structure).upper(), na=self.na, nb=self.nb,
            nc=self.nc, nd=self.nd, nf=self.nf, nk=self.nk,
        )

    def fit(self, X, y):
        u = as_float_vector(X, "X")
        yv = as_float_vector(y, "y")
        data = sysid_time.TimeSeries.from_arrays(u, yv, float(self.ts))
        spec = self._spec()
        if spec.structure == "ARX":
            result = sysid_time.arx_fit(data, spec)
        else:
            result = sysid_time.pem_fit(data, spec, max_iter=int(self.max_iter))
        self.result_ = result
        self.model_ = result.model
        self.theta_ = result.theta
        self.n_features_in_ = 1
        return self

    def predict(self, X, y0=None):
        """Simulate the fitted model against an input sequence."""
        check_is_fitted(self, "model_")
        u = as_float_vector(X, "X")
        return sysid_time.simulate_discrete(self.model_, u, y0=y0)

    def score(self, X, y):
        """1 - NMSE of the pure simulation against measured output."""
        check_is_fitted(self, "model_")
        yv = as_float_vector(y, "y")
        yhat = self.predict(X)
        denom = float(np.sum((yv - yv.mean()) ** 2))
        if denom == 0.0:
            raise NotFittedError("score undefined for constant target")
        return 1.0 - float(np.sum((yv - yhat) ** 2)) / denom


class LevyEstimator(BaseEstimator):
    """Linearised frequency-domain fit of a commensurate-order model.

    ``fit`` takes ``X`` as the frequency grid (rad/s) and ``y`` as the
    complex response samples.
    """

    def __init__(self, q="1/4", m=None, n=4, weighting="uniform",
                 aggregation="stacked"):
        self.q = q
        self.m = m
        self.n = n
        self.weighting = weighting
        self.aggregation = aggregation

    def fit(self, X, y):
        omega = as_float_vector(X, "X")
        resp = as_complex_vector(y, "y")
        m = self.n if self.m is None else self.m
        data = FrequencyResponse(omega, resp)
        problem = sysid_freq.LevyProblem(
            data, int(m), int(self.n), RationalOrder.parse(self.q),
            weighting=self.weighting, aggregation=self.aggregation,
        )
        fit = sysid_freq.solve_levy(problem)
        self.fit_ = fit
        self.model_ = fit.model
        self.J_ = fit.J
        self.condition_ = fit.condition
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        omega = as_float_vector(X, "X")
        return self.model_(omega)

    def score(self, X, y):
        """Negative mean squared complex residual (higher is better)."""
        check_is_fitted(self, "model_")
        data = FrequencyResponse(as_float_vector(X, "X"), as_complex_vector(y, "y"))
        return -sysid_freq.accuracy_J(data, self.model_)


class HyperdampedTuner(BaseEstimator):
    """Continuous-order controller tuning over a bank of plant models.

    ``fit`` takes ``X`` as a sequence of plant models
    (:class:`fracid.fotf.CommensurateFoTf`); ``y`` is ignored.
    """

    def __init__(self, q="1/4", n_gains=11, target_angle_deg=None, restarts=8,
                 seed=0, initial_gain=1e-4, max_iter=2000):
        self.q = q
        self.n_gains = n_gains
        self.target_angle_deg = target_angle_deg
        self.restarts = restarts
        self.seed = seed
        self.initial_gain = initial_gain
        self.max_iter = max_iter

    def fit(self, X, y=None):
        problem = ctrl_design.TuningProblem(
            plants=tuple(X), q=RationalOrder.parse(self.q),
            n_gains=int(self.n_gains),
            target_angle_deg=self.target_angle_deg,
            simplex=ctrl_design.SimplexConfig(max_iter=int(self.max_iter)),
            restarts=int(self.restarts), seed=int(self.seed),
            initial_gain=float(self.initial_gain),
        )
        report = ctrl_design.tune(problem)
        self.report_ = report
        self.controller_ = report.controller
        self.min_angle_deg_ = report.min_angle_deg
        self.objective_ = report.objective
        return self

    def predict(self, X):
        """Verify the tuned controller against a bank of plants."""
        check_is_fitted(self, "controller_")
        report = ctrl_design.verify(self.controller_, tuple(X))
        return np.asarray(report.per_plant_min_deg)
