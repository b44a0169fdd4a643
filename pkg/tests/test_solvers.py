import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modspline import (NormalEquationsError, SingularityVerdict, Status, analyze,
                       dispatch_solve, solve_min_norm, solve_normal_equations, solve_orthogonal)
from modspline.oracle import random_instance

SMALL = [
    (np.array([[1.0], [1.0]]), np.array([1.0, 3.0]), np.array([2.0])),
    (np.eye(3), np.array([4.0, -1.0, 2.5]), np.array([4.0, -1.0, 2.5])),
    (np.array([[1.0, 0], [1, 1], [1, 2]]), np.array([0.0, 1, 2]), np.array([0.0, 1])),
]


@pytest.mark.parametrize("B, y, x", SMALL)
@pytest.mark.parametrize("solver", [solve_normal_equations, solve_orthogonal, solve_min_norm])
def test_small_systems(solver, B, y, x):
    sol = solver(B, y)
    np.testing.assert_allclose(sol.coeffs, x, rtol=1e-10, atol=1e-12)


def test_method_names():
    B, y, _ = SMALL[2]
    assert solve_normal_equations(B, y).method == "normal_equations"
    assert solve_orthogonal(B, y).method == "orthogonal"
    assert solve_min_norm(B, y).method == "min_norm"


def test_normal_equations_breakdown():
    B = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(NormalEquationsError, match="not certified full rank"):
        solve_normal_equations(B, [2.0, 2.0])
    with pytest.raises(NormalEquationsError):
        solve_normal_equations(np.zeros((3, 2)), np.ones(3))


def test_min_norm_rank_one():
    sol = solve_min_norm(np.array([[1.0, 1.0], [1.0, 1.0]]), [2.0, 2.0])
    np.testing.assert_allclose(sol.coeffs, [1.0, 1.0])
    assert sol.rank == 1


def test_min_norm_zero_matrix():
    y = np.array([1.0, -2.0, 2.0])
    sol = solve_min_norm(np.zeros((3, 2)), y)
    assert sol.coeffs.tolist() == [0.0, 0.0]
    assert sol.residual_sse == 9.0


def test_orthogonal_basic_solution_on_deficient():
    B = np.array([[1.0, 2.0, 0.0], [2.0, 4.0, 1.0], [0.0, 0.0, 1.0], [1.0, 2.0, 1.0]])
    y = np.array([1.0, 2.0, 3.0, 4.0])
    qr = solve_orthogonal(B, y)
    mn = solve_min_norm(B, y)
    assert qr.rank == 2
    assert np.count_nonzero(qr.coeffs) == 2
    assert qr.residual_sse == pytest.approx(mn.residual_sse, rel=1e-10)
    assert np.linalg.norm(mn.coeffs) <= np.linalg.norm(qr.coeffs) + 1e-10


def _certified(seed):
    inst = random_instance(seed, model=1)
    dm = inst.design()
    v = analyze(1, inst.spec, inst.grid, inst.samples(), dm=dm, certify=False)
    y = np.random.default_rng(seed).standard_normal(inst.grid.n_samples)
    return dm.data, y, v


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_solver_agreement_on_certified(seed):
    B, y, v = _certified(seed)
    if v.status is not Status.FULL_RANK:
        return
    ne, qr, mn = solve_normal_equations(B, y), solve_orthogonal(B, y), solve_min_norm(B, y)
    scale = np.linalg.norm(mn.coeffs)
    for sol in (ne, qr):
        assert np.linalg.norm(sol.coeffs - mn.coeffs) <= 1e-6 * scale
        assert sol.residual_sse == pytest.approx(mn.residual_sse, rel=1e-8)
    gram_res = np.linalg.norm(B.T @ B @ ne.coeffs - B.T @ y)
    assert gram_res <= 1e-8 * np.linalg.norm(B.T @ y)
    assert ne.condition_estimate >= 1.0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6),
       solver=st.sampled_from([solve_normal_equations, solve_orthogonal, solve_min_norm]))
def test_first_order_optimality(seed, solver):
    B, y, v = _certified(seed)
    if v.status is not Status.FULL_RANK and solver is solve_normal_equations:
        return
    sol = solver(B, y)
    base = sol.residual_sse
    rng = np.random.default_rng(seed + 1)
    delta = 1e-4 * np.linalg.norm(sol.coeffs) + 1e-8
    for _ in range(20):
        d = rng.standard_normal(B.shape[1])
        d *= delta / np.linalg.norm(d)
        for sign in (1, -1):
            r = B @ (sol.coeffs + sign * d) - y
            assert r @ r >= base - 1e-12 * max(base, 1.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_residual_matches_recomputation(seed):
    B, y, _ = _certified(seed)
    for sol in (solve_orthogonal(B, y), solve_min_norm(B, y)):
        r = B @ sol.coeffs - y
        assert sol.residual_sse == pytest.approx(r @ r, rel=1e-8, abs=1e-300)


class TestDispatch:
    B = np.array([[1.0, 0], [1, 1], [1, 2]])
    y = np.array([0.0, 1.1, 1.9])

    def test_table(self):
        for status, method in [(Status.FULL_RANK, "normal_equations"),
                               (Status.DEFICIENT, "min_norm"), (Status.UNKNOWN, "orthogonal")]:
            sol = dispatch_solve(self.B, self.y, SingularityVerdict(status))
            assert sol.method == method and not sol.fallback

    def test_fallback_on_breakdown(self):
        B = np.array([[1.0, 1.0], [1.0, 1.0]])
        sol = dispatch_solve(B, [2.0, 2.0], SingularityVerdict(Status.FULL_RANK))
        assert sol.method == "min_norm" and sol.fallback
        np.testing.assert_allclose(sol.coeffs, [1.0, 1.0])
