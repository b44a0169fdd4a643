"""Least-squares solution paths and verdict-driven dispatch."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .singularity import SingularityVerdict, Status, Tolerances

logger = logging.getLogger(__name__)

NORMAL_EQUATIONS = "normal_equations"
ORTHOGONAL = "orthogonal"
MIN_NORM = "min_norm"


class NormalEquationsError(np.linalg.LinAlgError):
    """Cholesky breakdown on ``B^T B``; the caller should use a robust path."""


@dataclass(frozen=True)
class LsqSolution:
    coeffs: np.ndarray
    method: str
    residual_sse: float
    condition_estimate: float | None = None
    rank: int | None = None
    fallback: bool = False


def _matrix(B):
    return np.asarray(getattr(B, "data", B), dtype=float)


def _sse(B, x, y):
    r = B @ x - y
    return float(r @ r)


def solve_normal_equations(B, y, refine=2) -> LsqSolution:
    """Solve ``(B^T B) x = B^T y`` by Cholesky.

    Columns are equilibrated to unit norm before factoring, and ``refine``
    rounds of iterative refinement reuse the factor on the current
    residual.  ``condition_estimate`` is the squared ratio of the extreme
    Cholesky diagonal entries of the equilibrated system.
    """
    B = _matrix(B)
    y = np.asarray(y, dtype=float)
    norms = np.linalg.norm(B, axis=0)
    if np.any(norms == 0):
        raise NormalEquationsError("normal equations failed; matrix not certified full rank "
                                   "(zero column)")
    Bs = B / norms
    gram = Bs.T @ Bs
    try:
        factor = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NormalEquationsError(
            "normal equations failed; matrix not certified full rank") from exc
    diag = np.abs(np.diag(factor[0]))
    if not np.all(np.isfinite(factor[0])) or diag.min() <= 0:
        raise NormalEquationsError("normal equations failed; matrix not certified full rank")
    z = scipy.linalg.cho_solve(factor, Bs.T @ y, check_finite=False)
    for _ in range(refine):
        z = z + scipy.linalg.cho_solve(factor, Bs.T @ (y - Bs @ z), check_finite=False)
    x = z / norms
    cond = float((diag.max() / diag.min()) ** 2)
    return LsqSolution(x, NORMAL_EQUATIONS, _sse(B, x, y), cond, rank=B.shape[1])


def solve_orthogonal(B, y, eps_rank=1e-10) -> LsqSolution:
    """Column-pivoted QR.  Rank deficiency gives the basic solution, with
    the trailing pivoted columns set to zero."""
    B = _matrix(B)
    y = np.asarray(y, dtype=float)
    n_cols = B.shape[1]
    q, r, piv = scipy.linalg.qr(B, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return LsqSolution(np.zeros(n_cols), ORTHOGONAL, float(y @ y), rank=0)
    rank = int(np.count_nonzero(diag > eps_rank * diag[0] * max(B.shape)))
    qty = q[:, :rank].T @ y
    z = scipy.linalg.solve_triangular(r[:rank, :rank], qty)
    x = np.zeros(n_cols)
    x[piv[:rank]] = z
    return LsqSolution(x, ORTHOGONAL, _sse(B, x, y), rank=rank)


def solve_min_norm(B, y, eps_rank=1e-10) -> LsqSolution:
    """Minimum-norm solution from a truncated SVD."""
    B = _matrix(B)
    y = np.asarray(y, dtype=float)
    u, s, vt = np.linalg.svd(B, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return LsqSolution(np.zeros(B.shape[1]), MIN_NORM, float(y @ y), rank=0)
    keep = s > eps_rank * s[0] * max(B.shape)
    rank = int(np.count_nonzero(keep))
    x = vt[keep].T @ ((u[:, keep].T @ y) / s[keep])
    return LsqSolution(x, MIN_NORM, _sse(B, x, y), float(s[0] / s[rank - 1]), rank=rank)


def dispatch_solve(B, y, verdict: SingularityVerdict, tolerances=None) -> LsqSolution:
    """Pick the solver from the rank verdict.

    Full rank goes to normal equations (falling back to the SVD path if the
    factorization breaks down), proven deficiency to the minimum-norm SVD
    path, and anything uncertain to pivoted QR.
    """
    tolerances = tolerances or Tolerances()
    if verdict.status is Status.FULL_RANK:
        try:
            return solve_normal_equations(B, y)
        except NormalEquationsError as exc:
            logger.warning("%s; falling back to minimum-norm solver", exc)
            sol = solve_min_norm(B, y, tolerances.eps_rank)
            return LsqSolution(sol.coeffs, sol.method, sol.residual_sse,
                               sol.condition_estimate, sol.rank, fallback=True)
    if verdict.status is Status.DEFICIENT:
        return solve_min_norm(B, y, tolerances.eps_rank)
    return solve_orthogonal(B, y, tolerances.eps_rank)
