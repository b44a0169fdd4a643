"""Design matrices for the modulated (Model 1) and shifted (Model 2) fits.

Columns follow the truncated power order ``1, t, .., t^m`` then
``beta_l, .., beta_l^m`` for each interior knot, where
``beta_l = max(0, t - theta_l)``.  Model 2 stacks the modulated block and
the plain basis side by side; :func:`interleave_blocks` permutes the
columns into per-interval pairs, which exposes the block lower triangular
structure used by the singularity checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .prototype import PrototypeSamples
from .spline import IntervalAssignment, SplineSpec, TimeGrid, assign_intervals

MODULATED = "modulated"
SHIFT = "shift"


@dataclass(frozen=True)
class TimeMap:
    """Affine map ``u = (t - offset) / scale`` applied before assembly."""

    offset: float = 0.0
    scale: float = 1.0

    @classmethod
    def identity(cls):
        return cls(0.0, 1.0)

    @classmethod
    def unit_interval(cls, times):
        times = np.asarray(times, dtype=float)
        span = float(times[-1] - times[0])
        return cls(float(times[0]), span if span > 0 else 1.0)

    def __call__(self, t):
        return (np.asarray(t, dtype=float) - self.offset) / self.scale

    def apply_spec(self, spec: SplineSpec) -> SplineSpec:
        return SplineSpec(spec.degree, self(np.asarray(spec.knots)))

    def to_dict(self):
        return {"offset": self.offset, "scale": self.scale}


@dataclass(frozen=True)
class ColumnBlock:
    family: str
    interval: int  # 0-based
    start: int
    width: int

    @property
    def columns(self):
        return range(self.start, self.start + self.width)


@dataclass(frozen=True)
class ColumnLayout:
    blocks: tuple

    @property
    def n_columns(self) -> int:
        return sum(b.width for b in self.blocks)

    def block(self, family, interval) -> ColumnBlock:
        for b in self.blocks:
            if b.family == family and b.interval == interval:
                return b
        raise KeyError((family, interval))

    def interval_columns(self, interval):
        """All columns of the given interval across families, in layout order."""
        return [c for b in self.blocks if b.interval == interval for c in b.columns]


@dataclass(frozen=True)
class DesignMatrix:
    data: np.ndarray
    layout: ColumnLayout
    assignment: IntervalAssignment
    model: int
    spec: SplineSpec
    time_map: TimeMap = field(default_factory=TimeMap.identity)
    interleaved: bool = False

    @property
    def shape(self):
        return self.data.shape

    def row_ranges(self):
        return self.assignment.row_ranges()


def _family_layout(spec: SplineSpec, family, offset=0):
    blocks = []
    start = offset
    for k, width in enumerate(spec.block_widths()):
        blocks.append(ColumnBlock(family, k, start, width))
        start += width
    return blocks


def basis_matrix(times, spec: SplineSpec) -> np.ndarray:
    """Unmodulated truncated power basis, ``N x (mn + 1)``."""
    t = np.asarray(times, dtype=float)
    m = spec.degree
    cols = [np.ones_like(t)]
    cols.extend(t**j for j in range(1, m + 1))
    for knot in spec.interior_knots:
        beta = np.maximum(0.0, t - knot)
        cols.extend(beta**j for j in range(1, m + 1))
    return np.column_stack(cols)


def _prepare(spec: SplineSpec, grid: TimeGrid, samples: PrototypeSamples, normalize):
    t = grid.times
    if spec.knots[0] != t[0] or spec.knots[-1] != t[-1]:
        raise ValueError(
            "spline is not bound to the grid: first/last knots must equal the "
            f"first/last sample times ({t[0]!r}, {t[-1]!r}), got "
            f"({spec.knots[0]!r}, {spec.knots[-1]!r})"
        )
    if spec.has_empty_span():
        raise ValueError("coincident knots produce an empty interval")
    if samples.alpha.shape != t.shape:
        raise ValueError("prototype samples do not match the grid length")
    assignment = assign_intervals(grid, spec)
    if np.any(assignment.counts == 0):
        empty = [k + 1 for k in np.flatnonzero(assignment.counts == 0)]
        raise ValueError(f"empty interval(s) {empty}: no samples between knots")
    time_map = TimeMap.unit_interval(t) if normalize else TimeMap.identity()
    return assignment, time_map


def build_model1(spec, grid, samples, normalize=True, basis=None) -> DesignMatrix:
    """Matrix ``B`` with entries ``alpha_i * basis_j(t_i)``.

    ``basis`` may pass a precomputed :func:`basis_matrix` (in the mapped
    time domain) to skip reassembly.
    """
    assignment, time_map = _prepare(spec, grid, samples, normalize)
    if basis is None:
        basis = basis_matrix(time_map(grid.times), time_map.apply_spec(spec))
    data = samples.alpha[:, None] * basis
    layout = ColumnLayout(tuple(_family_layout(spec, MODULATED)))
    return DesignMatrix(data, layout, assignment, 1, spec, time_map)


def build_model2(spec, grid, samples, normalize=True, basis=None) -> DesignMatrix:
    """``[B1 B2]``: modulated basis followed by the plain basis."""
    assignment, time_map = _prepare(spec, grid, samples, normalize)
    if basis is None:
        basis = basis_matrix(time_map(grid.times), time_map.apply_spec(spec))
    data = np.hstack([samples.alpha[:, None] * basis, basis])
    blocks = _family_layout(spec, MODULATED) + _family_layout(spec, SHIFT, spec.n_coeffs)
    return DesignMatrix(data, ColumnLayout(tuple(blocks)), assignment, 2, spec, time_map)


def _interleaved_order(layout: ColumnLayout):
    return sorted(layout.blocks, key=lambda b: (b.interval, b.family != MODULATED))


def interleave_blocks(dm: DesignMatrix) -> DesignMatrix:
    """Permute columns to ``[B^{1,1}, B^{2,1}, B^{1,2}, B^{2,2}, ...]``."""
    if dm.interleaved:
        return dm
    order = _interleaved_order(dm.layout)
    perm = np.concatenate([np.arange(b.start, b.start + b.width) for b in order])
    blocks = []
    start = 0
    for b in order:
        blocks.append(ColumnBlock(b.family, b.interval, start, b.width))
        start += b.width
    return DesignMatrix(
        data=dm.data[:, perm],
        layout=ColumnLayout(tuple(blocks)),
        assignment=dm.assignment,
        model=dm.model,
        spec=dm.spec,
        time_map=dm.time_map,
        interleaved=True,
    )


def dump_matrix(dm: DesignMatrix, path):
    """Plain-text, row-major dump with full double precision."""
    np.savetxt(path, dm.data, fmt="%.17g")
