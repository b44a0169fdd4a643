"""Prototype (modulating) functions and their zero counts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spline import IntervalAssignment, TimeGrid


@dataclass(frozen=True)
class Sinusoid:
    """``g(t) = sin(omega * t + tau)``."""

    omega: float
    tau: float = 0.0

    def __call__(self, t):
        return np.sin(self.omega * np.asarray(t, dtype=float) + self.tau)


@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, t):
        return np.full(np.shape(t), float(self.value))


@dataclass(frozen=True)
class Tabulated:
    """Prototype given directly by its values on a grid."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


def amplitude(proto) -> float | None:
    """Natural magnitude of an analytic prototype, if it has one."""
    if isinstance(proto, Sinusoid):
        return 1.0
    if isinstance(proto, Constant):
        return abs(float(proto.value))
    return None


@dataclass(frozen=True)
class PrototypeSamples:
    """``alpha_i = g(t_i)`` plus the magnitude zeros are measured against.

    ``scale`` is ``max|alpha|``, raised to the prototype's amplitude when it
    has one: a sinusoid sampled exactly at its zeros yields only rounding
    noise, which must still count as zero.
    """

    alpha: np.ndarray
    source: object
    grid: TimeGrid
    scale: float = None

    def __post_init__(self):
        if self.scale is None:
            peak = float(np.abs(self.alpha).max(initial=0.0))
            amp = amplitude(self.source)
            object.__setattr__(self, "scale", max(peak, amp) if amp is not None else peak)

    def zero_mask(self, eps_zero=1e-12):
        return zero_mask(self.alpha, eps_zero, self.scale)

    def is_constant(self, eps_zero=1e-12) -> bool:
        return is_constant(self.alpha, eps_zero, self.scale)


def sample(proto, grid: TimeGrid) -> PrototypeSamples:
    """Sample ``alpha_i = g(t_i)`` on the grid."""
    if isinstance(proto, Tabulated):
        if len(proto.values) != grid.n_samples:
            raise ValueError(
                f"tabulated prototype has {len(proto.values)} values but the grid "
                f"has {grid.n_samples} samples"
            )
        alpha = np.array(proto.values, dtype=float)
    else:
        alpha = np.asarray(proto(grid.times), dtype=float)
    alpha.setflags(write=False)
    return PrototypeSamples(alpha=alpha, source=proto, grid=grid)


def zero_mask(alpha, eps_zero=1e-12, scale=None):
    """``|alpha_i| <= eps_zero * scale``; everything is zero when ``scale == 0``."""
    alpha = np.abs(np.asarray(alpha, dtype=float))
    if scale is None:
        scale = alpha.max(initial=0.0)
    if scale == 0.0:
        return np.ones(alpha.shape, dtype=bool)
    return alpha <= eps_zero * scale


def is_constant(alpha, eps_zero=1e-12, scale=None) -> bool:
    alpha = np.asarray(alpha, dtype=float)
    if alpha.size == 0:
        return True
    if scale is None:
        scale = np.abs(alpha).max()
    return bool(np.ptp(alpha) <= eps_zero * scale)


def count_zero_samples(samples: PrototypeSamples, assignment: IntervalAssignment,
                       eps_zero=1e-12) -> np.ndarray:
    """Per-interval count of samples with ``|alpha_i| <= eps_zero * scale``.

    An identically zero prototype counts every sample as a zero.
    """
    if eps_zero < 0:
        raise ValueError("eps_zero must be non-negative")
    zeros = samples.zero_mask(eps_zero)
    n = assignment.counts.size
    return np.bincount(assignment.interval_of, weights=zeros, minlength=n).astype(int)


def sinusoid_zero_bound(omega, duration) -> int:
    """A-priori bound ``ceil(2 * omega * duration) + 1`` on zeros in a window."""
    if omega < 0 or duration <= 0:
        raise ValueError("need omega >= 0 and duration > 0")
    return math.ceil(2 * omega * duration) + 1
