"""Fitting at a fixed (omega, tau) and the frequency/phase grid search."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from joblib import Parallel, delayed

from .design import TimeMap, basis_matrix, build_model1, build_model2
from .prototype import Sinusoid, sample
from .singularity import SingularityVerdict, Tolerances, analyze
from .solvers import LsqSolution, dispatch_solve
from .spline import SplineSpec, TimeGrid, eval_spline

_STEP_SLACK = 1e-9


@dataclass(frozen=True)
class Signal:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n_samples,):
            raise ValueError(
                f"signal has {values.size} values for {self.grid.n_samples} sample times")
        if not np.all(np.isfinite(values)):
            raise ValueError("signal values contain NaN or infinite entries")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_arrays(cls, times, values):
        return cls(TimeGrid(times), values)

    @property
    def times(self):
        return self.grid.times


def _axis(start, end, step, name):
    if step <= 0:
        raise ValueError(f"{name} step must be positive")
    if end < start:
        raise ValueError(f"{name} range is empty: end {end} < start {start}")
    count = int(math.floor((end - start) / step + _STEP_SLACK)) + 1
    return start + step * np.arange(count)


@dataclass(frozen=True)
class GridConfig:
    """Inclusive frequency and phase ranges swept by :func:`grid_search`."""

    omega_start: float
    omega_end: float
    omega_step: float = 1.0
    tau_start: float = 0.0
    tau_end: float = 2 * math.pi
    tau_step: float = math.pi / 8

    def __post_init__(self):
        self.omegas()
        self.taus()

    @classmethod
    def single(cls, omega, tau):
        return cls(omega, omega, 1.0, tau, tau, 1.0)

    def omegas(self):
        return _axis(self.omega_start, self.omega_end, self.omega_step, "omega")

    def taus(self):
        return _axis(self.tau_start, self.tau_end, self.tau_step, "tau")

    @property
    def n_cells(self) -> int:
        return len(self.omegas()) * len(self.taus())

    def cells(self):
        """``(omega, tau)`` pairs, omega in the outer loop."""
        taus = self.taus()
        return [(float(w), float(t)) for w in self.omegas() for t in taus]


@dataclass(frozen=True)
class FitResult:
    model: int
    omega: float
    tau: float
    solution: LsqSolution
    verdict: SingularityVerdict
    sse: float
    time_map: TimeMap
    spec: SplineSpec
    prototype: object = None

    @property
    def coeffs(self):
        return self.solution.coeffs

    @property
    def modulated_coeffs(self):
        return self.coeffs[: self.spec.n_coeffs]

    @property
    def shift_coeffs(self):
        return self.coeffs[self.spec.n_coeffs:] if self.model == 2 else None

    @property
    def method(self):
        return self.solution.method

    def evaluate(self, t):
        """Fitted curve ``A1(t) g(t) [+ A2(t)]`` at original times ``t``."""
        t = np.asarray(t, dtype=float)
        mapped = self.time_map.apply_spec(self.spec)
        u = self.time_map(t)
        g = self.prototype(t) if self.prototype is not None else np.sin(self.omega * t + self.tau)
        value = eval_spline(mapped, self.modulated_coeffs, u) * g
        if self.model == 2:
            value = value + eval_spline(mapped, self.shift_coeffs, u)
        return value


class GridCell(NamedTuple):
    omega: float
    tau: float
    sse: float
    method: str


def _check_model(model):
    if model not in (1, 2):
        raise ValueError(f"model must be 1 or 2, got {model!r}")


def fit_fixed(model, signal: Signal, spec: SplineSpec, omega, tau, tolerances=None,
              normalize=True, certify=True, prototype=None, basis=None) -> FitResult:
    """Fit one model with the prototype frozen at ``sin(omega t + tau)``.

    ``prototype`` overrides the sinusoid (e.g. a constant).  ``basis`` is an
    optional precomputed unmodulated basis for the same grid and time map.
    """
    _check_model(model)
    tolerances = tolerances or Tolerances()
    proto = prototype if prototype is not None else Sinusoid(float(omega), float(tau))
    samples = sample(proto, signal.grid)
    build = build_model1 if model == 1 else build_model2
    dm = build(spec, signal.grid, samples, normalize=normalize, basis=basis)
    verdict = analyze(model, spec, signal.grid, samples, tolerances, certify=certify, dm=dm)
    solution = dispatch_solve(dm.data, signal.values, verdict, tolerances)
    return FitResult(model, float(omega), float(tau), solution, verdict,
                     solution.residual_sse, dm.time_map, spec, proto)


def shared_basis(signal: Signal, spec: SplineSpec, normalize=True):
    """Unmodulated basis reused across grid cells; it does not depend on (omega, tau)."""
    time_map = TimeMap.unit_interval(signal.times) if normalize else TimeMap.identity()
    return basis_matrix(time_map(signal.times), time_map.apply_spec(spec))


def grid_search(model, signal: Signal, spec: SplineSpec, grid_cfg: GridConfig,
                tolerances=None, normalize=True, certify=True, n_jobs=None, tie_rtol=1e-13):
    """Sweep every (omega, tau) cell and keep the smallest SSE.

    Cells are visited omega-major; on equal SSE the earlier cell wins.  SSE
    values closer than ``tie_rtol * ||y||^2`` count as equal, so exact
    twins such as ``tau`` and ``tau + pi`` under Model 1 (the sign moves
    into the coefficients) are not separated by rounding noise.
    With ``n_jobs`` the cells run through joblib and are merged in cell
    order, so the outcome does not depend on scheduling.

    Returns ``(best, table)`` where ``table`` lists a :class:`GridCell` per cell.
    """
    _check_model(model)
    tolerances = tolerances or Tolerances()
    basis = shared_basis(signal, spec, normalize)
    cells = grid_cfg.cells()

    def run(omega, tau):
        return fit_fixed(model, signal, spec, omega, tau, tolerances, normalize, certify,
                         basis=basis)

    if n_jobs in (None, 1):
        results = [run(w, t) for w, t in cells]
    else:
        results = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(run)(w, t) for w, t in cells)

    tie = tie_rtol * float(signal.values @ signal.values)
    best = results[0]
    for res in results[1:]:
        if res.sse < best.sse - tie:
            best = res
    table = [GridCell(r.omega, r.tau, r.sse, r.method) for r in results]
    return best, table
