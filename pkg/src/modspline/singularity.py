"""Rank analysis of the design matrices.

``theorem1_check`` and ``theorem2_check`` are sufficient conditions: a
pass certifies full column rank, a failure certifies nothing.  The only
deficiency they can prove is the constant-prototype case for Model 2,
where every shift column is a multiple of a modulated column.
``numeric_rank`` is the singular-value fallback.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .design import MODULATED, SHIFT, DesignMatrix, build_model1, build_model2, interleave_blocks
from .prototype import PrototypeSamples, count_zero_samples


@dataclass(frozen=True)
class Tolerances:
    eps_zero: float = 1e-12
    eps_rank: float = 1e-10

    def __post_init__(self):
        if self.eps_zero < 0:
            raise ValueError("eps_zero must be >= 0")
        if self.eps_rank <= 0:
            raise ValueError("eps_rank must be > 0")


class Status(str, enum.Enum):
    FULL_RANK = "certified_full_rank"
    DEFICIENT = "certified_deficient"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class IntervalRecord:
    k: int  # 1-based, as reported
    n_samples: int
    n_zeros: int
    required: int
    margin: int

    def to_dict(self):
        return {
            "k": self.k,
            "N_k": self.n_samples,
            "Z_k": self.n_zeros,
            "required": self.required,
            "margin": self.margin,
        }


@dataclass(frozen=True)
class SingularityVerdict:
    status: Status
    by: str | None = None
    reason: str = ""
    per_interval: tuple = ()
    numeric_rank: int | None = None
    n_columns: int | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)

    @property
    def full_rank(self) -> bool:
        return self.status is Status.FULL_RANK

    def to_dict(self):
        return {
            "status": self.status.value,
            "by": self.by,
            "reason": self.reason,
            "numeric_rank": self.numeric_rank,
            "n_columns": self.n_columns,
            "eps_zero": self.tolerances.eps_zero,
            "eps_rank": self.tolerances.eps_rank,
            "per_interval": [r.to_dict() for r in self.per_interval],
        }


@dataclass(frozen=True)
class IntervalElimination:
    k: int
    bottom_rows: np.ndarray
    lam: np.ndarray  # c_k x (N_k - c_k); top shift rows equal lam.T @ bottom shift rows
    reduced: np.ndarray  # B11 - lam.T @ B21
    tilde_rank: int
    reconstruction_error: float


@dataclass(frozen=True)
class EliminationCertificate:
    intervals: tuple = ()

    @property
    def residual_block_rank(self) -> int:
        return sum(iv.tilde_rank for iv in self.intervals)


def singular_values(matrix):
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0:
        return np.zeros(0)
    return np.linalg.svd(matrix, compute_uv=False)


def numeric_rank(matrix, eps_rank=1e-10) -> int:
    """Count singular values above ``eps_rank * sigma_max * max(shape)``."""
    matrix = np.asarray(matrix, dtype=float)
    sv = singular_values(matrix)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > eps_rank * sv[0] * max(matrix.shape)))


def theorem1_check(spec, assignment, samples: PrototypeSamples, eps_zero=1e-12,
                   tolerances=None) -> SingularityVerdict:
    """Row-count condition ``N_1 - Z_1 >= m + 1`` and ``N_k - Z_k >= m``."""
    tolerances = tolerances or Tolerances(eps_zero=eps_zero)
    zeros = count_zero_samples(samples, assignment, tolerances.eps_zero)
    records = []
    for k, (n_k, z_k, width) in enumerate(zip(assignment.counts, zeros, spec.block_widths())):
        records.append(IntervalRecord(k + 1, int(n_k), int(z_k), width, int(n_k - z_k - width)))
    ok = all(r.margin >= 0 for r in records)
    if ok:
        return SingularityVerdict(Status.FULL_RANK, "theorem1", "", tuple(records),
                                  n_columns=spec.n_coeffs, tolerances=tolerances)
    short = [r.k for r in records if r.margin < 0]
    return SingularityVerdict(Status.UNKNOWN, None,
                              f"too few non-zero prototype samples in interval(s) {short}",
                              tuple(records), n_columns=spec.n_coeffs, tolerances=tolerances)


def rank_threshold(matrix, eps_rank=1e-10) -> float:
    """Absolute cut-off ``eps_rank * sigma_max * max(shape)`` used by numeric_rank."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0:
        return 0.0
    return eps_rank * np.linalg.norm(matrix, 2) * max(matrix.shape)


def theorem2_check(dm: DesignMatrix, samples: PrototypeSamples, eps_rank=1e-10,
                   tolerances=None):
    """Block elimination check for the shifted model.

    In each diagonal block the last ``c_k`` rows form the bottom part.  The
    shift columns of the top rows are written as combinations of the bottom
    rows (multipliers ``lam``), the same combinations are subtracted from the
    modulated columns, and the reduced block must keep full column rank.

    Ranks are judged against the cut-off of the whole matrix, and the reduced
    block's singular values are deflated by ``1 + ||lam||`` (the norm bound of
    the row operation), so a certified block is also well separated from
    rank deficiency at the scale :func:`numeric_rank` sees.

    Returns ``(verdict, certificate)``; the certificate is ``None`` when no
    elimination was attempted.
    """
    tolerances = tolerances or Tolerances(eps_rank=eps_rank)
    if dm.model != 2:
        raise ValueError("theorem2_check applies to Model 2 matrices")
    dm = interleave_blocks(dm)
    spec = dm.spec
    widths = spec.block_widths()
    n_cols = 2 * spec.n_coeffs
    zeros = count_zero_samples(samples, dm.assignment, tolerances.eps_zero)

    records = []
    for k, ((r0, r1), width) in enumerate(zip(dm.row_ranges(), widths)):
        n_k = r1 - r0
        records.append(IntervalRecord(k + 1, n_k, int(zeros[k]), 2 * width, n_k - 2 * width))
    records = tuple(records)

    def verdict(status, reason="", by=None):
        return SingularityVerdict(status, by, reason, records, n_columns=n_cols,
                                  tolerances=tolerances)

    if samples.is_constant(tolerances.eps_zero):
        return verdict(Status.DEFICIENT, "constant prototype", by="theorem2"), None

    short = [r.k for r in records if r.margin < 0]
    if short:
        return verdict(Status.UNKNOWN, f"insufficient rows in interval(s) {short}"), None

    cutoff = rank_threshold(dm.data, tolerances.eps_rank)
    done = []
    for k, (r0, r1) in enumerate(dm.row_ranges()):
        width = widths[k]
        mod_cols = list(dm.layout.block(MODULATED, k).columns)
        shift_cols = list(dm.layout.block(SHIFT, k).columns)
        split = r1 - width
        b11 = dm.data[r0:split][:, mod_cols]
        b12 = dm.data[r0:split][:, shift_cols]
        b21 = dm.data[split:r1][:, mod_cols]
        b22 = dm.data[split:r1][:, shift_cols]
        if np.count_nonzero(singular_values(b22) > cutoff) < width:
            return (verdict(Status.UNKNOWN, f"singular bottom block in interval {k + 1}"),
                    EliminationCertificate(tuple(done)))
        lam = np.linalg.solve(b22.T, b12.T)
        scale = np.abs(b12).max(initial=0.0)
        err = np.abs(b12 - lam.T @ b22).max(initial=0.0)
        rel = err / scale if scale > 0 else err
        reduced = b11 - lam.T @ b21
        deflate = 1.0 + np.linalg.norm(lam, 2)
        tilde_rank = int(np.count_nonzero(singular_values(reduced) / deflate > cutoff))
        done.append(IntervalElimination(k + 1, np.arange(split, r1), lam, reduced,
                                        tilde_rank, float(rel)))
        if tilde_rank < width:
            return (verdict(Status.UNKNOWN,
                            f"reduced block in interval {k + 1} has rank "
                            f"{tilde_rank} < {width}"),
                    EliminationCertificate(tuple(done)))
    return verdict(Status.FULL_RANK, by="theorem2"), EliminationCertificate(tuple(done))


def certify_numerically(verdict: SingularityVerdict, matrix, tolerances) -> SingularityVerdict:
    """Upgrade an ``UNKNOWN`` verdict using the numeric rank of ``matrix``."""
    rank = numeric_rank(matrix, tolerances.eps_rank)
    n_cols = np.shape(matrix)[1]
    status = Status.FULL_RANK if rank == n_cols else Status.DEFICIENT
    reason = verdict.reason if status is Status.FULL_RANK else f"numeric rank {rank} < {n_cols}"
    return SingularityVerdict(status, "numeric", reason, verdict.per_interval, rank, n_cols,
                              tolerances)


def analyze(model, spec, grid, samples, tolerances=None, certify=True, normalize=True,
            dm=None) -> SingularityVerdict:
    """Run the model's structural check, then the numeric fallback if needed."""
    tolerances = tolerances or Tolerances()
    if dm is None:
        build = build_model1 if model == 1 else build_model2
        dm = build(spec, grid, samples, normalize=normalize)
    if model == 1:
        verdict = theorem1_check(spec, dm.assignment, samples, tolerances=tolerances)
    elif model == 2:
        verdict, _ = theorem2_check(dm, samples, tolerances=tolerances)
    else:
        raise ValueError(f"model must be 1 or 2, got {model!r}")
    if verdict.status is Status.UNKNOWN and certify:
        verdict = certify_numerically(verdict, dm.data, tolerances)
    return verdict
