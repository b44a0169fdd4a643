"""scikit-learn estimators wrapping the fitting routines.

``X`` holds the sample times, either as a 1-d array or a single-column 2-d
array; ``y`` holds the signal values.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_array, check_X_y

from .fitter import GridConfig, Signal, fit_fixed, grid_search
from .singularity import Tolerances
from .spline import SplineSpec


def _as_times(X):
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[:, None]
    X = check_array(X, ensure_2d=True)
    if X.shape[1] != 1:
        raise ValueError(f"expected a single time column, got {X.shape[1]} features")
    return X[:, 0]


class SplineWaveRegressor(RegressorMixin, BaseEstimator):
    """Spline-modulated sinusoid ``A(t) sin(omega t + tau)`` with fixed knots.

    With ``model=2`` a second spline of the same degree and knots is added
    as a vertical shift.

    Parameters
    ----------
    model : {1, 2}
    degree : int
        Spline degree ``m``.
    n_intervals : int
        Number of equidistant pieces; ignored when ``knots`` is given.
    knots : sequence of float, optional
        Full knot chain; first and last must equal the first and last
        sample times.
    omega, tau : float
        Frequency and phase of the prototype sinusoid.
    eps_zero, eps_rank : float
        Zero and rank tolerances of the singularity analysis.
    normalize : bool
        Map times to ``[0, 1]`` before assembling the design matrix.
    certify : bool
        Resolve inconclusive structural checks with a numeric rank.

    Attributes
    ----------
    coef_ : ndarray
        Modulated spline coefficients (in the normalized time domain).
    shift_coef_ : ndarray or None
        Shift spline coefficients for ``model=2``.
    knots_ : tuple
    verdict_ : SingularityVerdict
    solver_ : str
        Solver actually used.
    sse_ : float
    result_ : FitResult
    """

    def __init__(self, model=1, degree=4, n_intervals=5, knots=None, omega=1.0, tau=0.0,
                 eps_zero=1e-12, eps_rank=1e-10, normalize=True, certify=True):
        self.model = model
        self.degree = degree
        self.n_intervals = n_intervals
        self.knots = knots
        self.omega = omega
        self.tau = tau
        self.eps_zero = eps_zero
        self.eps_rank = eps_rank
        self.normalize = normalize
        self.certify = certify

    def _signal(self, X, y):
        t = _as_times(X)
        t, y = check_X_y(t[:, None], y, y_numeric=True)
        order = np.argsort(t[:, 0], kind="stable")
        return Signal.from_arrays(t[order, 0], y[order])

    def _spec(self, signal):
        t = signal.times
        if self.knots is not None:
            return SplineSpec(self.degree, self.knots)
        return SplineSpec.equidistant(self.degree, self.n_intervals, t[0], t[-1])

    def _tolerances(self):
        return Tolerances(eps_zero=self.eps_zero, eps_rank=self.eps_rank)

    def _store(self, result):
        self.result_ = result
        self.coef_ = result.modulated_coeffs
        self.shift_coef_ = result.shift_coeffs
        self.knots_ = result.spec.knots
        self.verdict_ = result.verdict
        self.solver_ = result.method
        self.sse_ = result.sse
        self.time_map_ = result.time_map
        self.n_features_in_ = 1
        return self

    def fit(self, X, y):
        signal = self._signal(X, y)
        result = fit_fixed(self.model, signal, self._spec(signal), self.omega, self.tau,
                           self._tolerances(), self.normalize, self.certify)
        return self._store(result)

    def predict(self, X):
        check_is_fitted(self, "result_")
        return self.result_.evaluate(_as_times(X))


class SplineWaveSearch(SplineWaveRegressor):
    """Grid search over ``(omega, tau)``, keeping the smallest-SSE cell.

    ``omega_range`` and ``tau_range`` are inclusive ``(start, end, step)``
    triples.  Extra attributes: ``best_omega_``, ``best_tau_`` and
    ``grid_table_`` (one row per cell, omega-major).
    """

    def __init__(self, model=1, degree=4, n_intervals=5, knots=None,
                 omega_range=(1.0, 16.0, 1.0), tau_range=(0.0, 2 * math.pi, math.pi / 8),
                 eps_zero=1e-12, eps_rank=1e-10, normalize=True, certify=True, n_jobs=None):
        self.model = model
        self.degree = degree
        self.n_intervals = n_intervals
        self.knots = knots
        self.omega_range = omega_range
        self.tau_range = tau_range
        self.eps_zero = eps_zero
        self.eps_rank = eps_rank
        self.normalize = normalize
        self.certify = certify
        self.n_jobs = n_jobs

    def fit(self, X, y):
        signal = self._signal(X, y)
        cfg = GridConfig(*self.omega_range, *self.tau_range)
        best, table = grid_search(self.model, signal, self._spec(signal), cfg,
                                  self._tolerances(), self.normalize, self.certify,
                                  n_jobs=self.n_jobs)
        self.best_omega_ = best.omega
        self.best_tau_ = best.tau
        self.grid_table_ = table
        return self._store(result=best)
