"""Fixed-knot polynomial splines over the truncated power basis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SplineSpec:
    """Spline of degree ``degree`` with ``n_intervals`` pieces.

    ``knots`` holds the full chain ``theta_0 <= ... <= theta_n``; the
    interior knots are ``knots[1:-1]``.
    """

    degree: int
    knots: tuple

    def __post_init__(self):
        knots = tuple(float(k) for k in self.knots)
        object.__setattr__(self, "knots", knots)
        if int(self.degree) != self.degree or self.degree < 1:
            raise ValueError(f"degree must be a positive integer, got {self.degree!r}")
        object.__setattr__(self, "degree", int(self.degree))
        if len(knots) < 2:
            raise ValueError("need at least two knots (theta_0 and theta_n)")
        if not all(np.isfinite(knots)):
            raise ValueError("knots must be finite")
        if any(b < a for a, b in zip(knots, knots[1:])):
            raise ValueError("knots must be non-decreasing")

    @classmethod
    def equidistant(cls, degree, n_intervals, start, stop):
        """Knots ``theta_k = start + k * (stop - start) / n``."""
        if int(n_intervals) != n_intervals or n_intervals < 1:
            raise ValueError(f"n_intervals must be a positive integer, got {n_intervals!r}")
        n_intervals = int(n_intervals)
        width = (stop - start) / n_intervals
        knots = [start + k * width for k in range(n_intervals)] + [stop]
        return cls(degree, knots)

    @property
    def n_intervals(self) -> int:
        return len(self.knots) - 1

    @property
    def n_coeffs(self) -> int:
        return self.degree * self.n_intervals + 1

    @property
    def interior_knots(self) -> tuple:
        return self.knots[1:-1]

    def block_widths(self) -> list[int]:
        """Column count of each per-interval block: ``m + 1`` then ``m``."""
        return [self.degree + 1] + [self.degree] * (self.n_intervals - 1)

    def has_empty_span(self) -> bool:
        return any(b == a for a, b in zip(self.knots, self.knots[1:]))


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing sample times."""

    times: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size == 0:
            raise ValueError("times must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(times)):
            raise ValueError("times contain NaN or infinite values")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        times = times.copy()
        times.setflags(write=False)
        object.__setattr__(self, "times", times)

    def __len__(self):
        return self.times.size

    @property
    def n_samples(self) -> int:
        return self.times.size

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])


@dataclass(frozen=True)
class IntervalAssignment:
    """Interval index (0-based) of every sample plus per-interval counts."""

    interval_of: np.ndarray
    counts: np.ndarray

    def row_ranges(self) -> list[tuple[int, int]]:
        """Half-open row ranges ``[start, stop)`` for each interval."""
        stops = np.cumsum(self.counts)
        starts = stops - self.counts
        return [(int(a), int(b)) for a, b in zip(starts, stops)]


def truncated_power(t, knot, j):
    """``(t - knot)_+ ** j``; exactly zero whenever ``t <= knot``."""
    if j < 1:
        raise ValueError("power j must be >= 1")
    t = np.asarray(t, dtype=float)
    diff = t - knot
    out = np.where(diff > 0, diff, 0.0) ** j
    return out if out.ndim else float(out)


def eval_spline(spec: SplineSpec, coeffs, t):
    """Evaluate the spline at ``t`` (scalar or array).

    Coefficients are ordered ``x_0, x_11..x_1m, x_21..x_2m, ..., x_n1..x_nm``.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (spec.n_coeffs,):
        raise ValueError(
            f"expected {spec.n_coeffs} coefficients for degree={spec.degree}, "
            f"n_intervals={spec.n_intervals}; got shape {coeffs.shape}"
        )
    m = spec.degree
    t = np.asarray(t, dtype=float)
    value = np.full(t.shape, coeffs[0])
    for j in range(1, m + 1):
        value = value + coeffs[j] * t**j
    for l, knot in enumerate(spec.interior_knots, start=1):
        for j in range(1, m + 1):
            value = value + coeffs[l * m + j] * truncated_power(t, knot, j)
    return value if value.ndim else float(value)


def assign_intervals(grid: TimeGrid, spec: SplineSpec) -> IntervalAssignment:
    """Assign samples to ``[theta_0, theta_1]`` and ``(theta_{k-1}, theta_k]``."""
    t = grid.times
    knots = np.asarray(spec.knots)
    if t[0] < knots[0] or t[-1] > knots[-1]:
        raise ValueError(
            f"samples span [{t[0]!r}, {t[-1]!r}] outside knot range "
            f"[{knots[0]!r}, {knots[-1]!r}]"
        )
    # side="left" counts interior knots strictly below t, so t == theta_k stays in interval k
    interval_of = np.searchsorted(knots[1:-1], t, side="left")
    counts = np.bincount(interval_of, minlength=spec.n_intervals)
    return IntervalAssignment(interval_of=interval_of, counts=counts)
