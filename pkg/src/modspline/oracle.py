"""Brute-force checks used by the test suite and ``modspline verify``."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .design import build_model1, build_model2
from .prototype import Constant, Sinusoid, sample
from .singularity import Status, Tolerances, theorem1_check, theorem2_check
from .spline import SplineSpec, TimeGrid, assign_intervals


def vandermonde_det(nodes) -> float:
    """Determinant of the square Vandermonde matrix by the product formula."""
    nodes = [float(x) for x in nodes]
    det = 1.0
    for i, j in itertools.combinations(range(len(nodes)), 2):
        det *= nodes[j] - nodes[i]
    return det


def cofactor_det(matrix) -> float:
    """Laplace expansion along the first row; only for small matrices."""
    a = [list(map(float, row)) for row in matrix]
    n = len(a)
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    total = 0.0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in a[1:]]
        total += (-1) ** j * a[0][j] * cofactor_det(minor)
    return total


def oracle_rank(matrix, eps_rank=1e-10) -> int:
    """Rank via LAPACK ``gesvd`` on the transpose.

    Same threshold policy as :func:`modspline.singularity.numeric_rank`,
    different driver and orientation.
    """
    a = np.asarray(matrix, dtype=float).T
    if a.size == 0:
        return 0
    sv = scipy.linalg.svd(a, compute_uv=False, lapack_driver="gesvd")
    if sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > eps_rank * sv[0] * max(a.shape)))


@dataclass(frozen=True)
class RandomInstance:
    seed: int
    model: int
    spec: SplineSpec
    grid: TimeGrid
    prototype: object

    def samples(self):
        return sample(self.prototype, self.grid)

    def design(self, normalize=True):
        build = build_model1 if self.model == 1 else build_model2
        return build(self.spec, self.grid, self.samples(), normalize=normalize)


def random_instance(seed, model=1, max_degree=4, max_intervals=5, max_samples=200,
                    prototype="sinusoid", theorem2_ready=False) -> RandomInstance:
    """Reproducible random problem.

    Grids are jittered-uniform over a random duration; interior knots are
    jittered equidistant positions.  Roughly a third of the sinusoids are
    tuned to the sampling step so that exact zeros land on the grid.

    ``theorem2_ready`` redraws until every interval holds at least twice
    its block width in samples and keeps tuned sinusoids off the
    degenerate all-zero case.
    """
    rng = np.random.default_rng(seed)
    while True:
        m = int(rng.integers(1, max_degree + 1))
        n = int(rng.integers(1, max_intervals + 1))
        per = 2 * (m + 1) if theorem2_ready else m
        lo = min(max(per * n, 2), max_samples)
        n_samples = int(rng.integers(lo, max_samples + 1))
        duration = float(rng.uniform(0.5, 10.0))
        step = duration / (n_samples - 1)
        tuned = prototype == "sinusoid" and rng.random() < 0.35
        times = np.linspace(0.0, duration, n_samples)
        if not tuned:
            times[1:-1] += rng.uniform(-0.3, 0.3, n_samples - 2) * step
        knots = np.linspace(0.0, duration, n + 1)
        knots[1:-1] += rng.uniform(-0.25, 0.25, n - 1) * (duration / n)
        knots[0], knots[-1] = times[0], times[-1]
        spec = SplineSpec(m, knots)
        grid = TimeGrid(times)
        counts = assign_intervals(grid, spec).counts
        need = 2 * np.array(spec.block_widths()) if theorem2_ready else 1
        if np.all(counts >= need):
            break
    if prototype == "constant":
        proto = Constant(float(rng.choice([-1, 1]) * rng.uniform(0.1, 5.0)))
    elif tuned:
        # sin(pi * i * p / q): zero at every q-th sample
        q = int(rng.integers(2 if theorem2_ready else 1, 5))
        proto = Sinusoid(np.pi / (q * step), 0.0)
    else:
        proto = Sinusoid(float(rng.uniform(0.5, 20.0)), float(rng.uniform(0, 2 * np.pi)))
    return RandomInstance(int(seed), model, spec, grid, proto)


@dataclass(frozen=True)
class RankComparison:
    seed: int
    status: Status
    oracle_rank: int
    n_columns: int
    consistent: bool


def exhaustive_rank_compare(instance: RandomInstance, tolerances=None) -> RankComparison:
    """Run the model's structural check and the independent rank oracle.

    Consistent means a full-rank certification is backed by full oracle
    rank and a deficiency certification by a rank below the column count.
    """
    tolerances = tolerances or Tolerances()
    samples = instance.samples()
    dm = instance.design()
    if instance.model == 1:
        verdict = theorem1_check(dm.spec, dm.assignment, samples, tolerances=tolerances)
    else:
        verdict, _ = theorem2_check(dm, samples, tolerances=tolerances)
    rank = oracle_rank(dm.data, tolerances.eps_rank)
    n_cols = dm.data.shape[1]
    if verdict.status is Status.FULL_RANK:
        consistent = rank == n_cols
    elif verdict.status is Status.DEFICIENT:
        consistent = rank < n_cols
    else:
        consistent = True
    return RankComparison(instance.seed, verdict.status, rank, n_cols, consistent)


def verify(seeds, models=(1, 2), tolerances=None):
    """Soundness sweep over seeded instances; returns per-model tallies."""
    summary = {}
    for model in models:
        tally = {"instances": 0, "certified": 0, "deficient": 0, "unknown": 0,
                 "violations": 0, "failed_seeds": []}
        for seed in seeds:
            res = exhaustive_rank_compare(random_instance(seed, model=model), tolerances)
            tally["instances"] += 1
            key = {Status.FULL_RANK: "certified", Status.DEFICIENT: "deficient",
                   Status.UNKNOWN: "unknown"}[res.status]
            tally[key] += 1
            if not res.consistent:
                tally["violations"] += 1
                tally["failed_seeds"].append(seed)
        summary[model] = tally
    return summary
