import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modspline import (Constant, GridConfig, Signal, SplineSpec, Status, basis_matrix,
                       eval_spline, fit_fixed, grid_search)
from modspline.design import TimeMap


def _wave(t, spec, x1, omega, tau, x2=None):
    tm = TimeMap.unit_interval(t)
    mapped = tm.apply_spec(spec)
    y = eval_spline(mapped, x1, tm(t)) * np.sin(omega * t + tau)
    if x2 is not None:
        y = y + eval_spline(mapped, x2, tm(t))
    return y


@pytest.fixture
def eeg_grid():
    t = np.linspace(0, 10, 1000)
    return t, SplineSpec.equidistant(4, 5, 0, 10)


class TestGridConfig:
    def test_cell_count(self):
        cfg = GridConfig(1, 16, 1, 0, 2 * math.pi, math.pi / 8)
        assert len(cfg.omegas()) == 16 and len(cfg.taus()) == 17
        assert cfg.n_cells == 272

    def test_order_is_omega_major(self):
        cells = GridConfig(1, 2, 1, 0, 0.5, 0.5).cells()
        assert cells == [(1.0, 0.0), (1.0, 0.5), (2.0, 0.0), (2.0, 0.5)]

    @pytest.mark.parametrize("args", [(1, 0, 1), (1, 2, 0), (1, 2, -1)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            GridConfig(*args)


class TestFitFixed:
    def test_exact_prototype(self, eeg_grid):
        t, spec = eeg_grid
        y = np.sin(3 * t + 0.4)
        res = fit_fixed(1, Signal.from_arrays(t, y), spec, 3, 0.4)
        assert res.sse <= 1e-18 * (y @ y)
        mapped = res.time_map.apply_spec(spec)
        np.testing.assert_allclose(eval_spline(mapped, res.coeffs, res.time_map(t)), 1.0,
                                   atol=1e-8)

    def test_zero_signal(self, eeg_grid):
        t, spec = eeg_grid
        res = fit_fixed(2, Signal.from_arrays(t, np.zeros_like(t)), spec, 5, 0.0)
        assert res.sse == 0.0
        assert not np.any(res.coeffs)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_coefficient_recovery(self, seed):
        rng = np.random.default_rng(seed)
        t = np.linspace(0, 10, 1000)
        spec = SplineSpec.equidistant(4, 5, 0, 10)
        x = rng.standard_normal(spec.n_coeffs)
        omega, tau = rng.uniform(1, 16), rng.uniform(0, 2 * np.pi)
        res = fit_fixed(1, Signal.from_arrays(t, _wave(t, spec, x, omega, tau)), spec, omega, tau)
        assert res.verdict.status is Status.FULL_RANK
        assert np.linalg.norm(res.coeffs - x) <= 1e-6 * np.linalg.norm(x)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 10**6), model=st.sampled_from([1, 2]))
    def test_sse_consistent_with_evaluation(self, seed, model):
        rng = np.random.default_rng(seed)
        t = np.sort(rng.uniform(0, 4, 150)) + np.arange(150) * 1e-4
        spec = SplineSpec.equidistant(3, 3, t[0], t[-1])
        y = rng.standard_normal(t.size)
        res = fit_fixed(model, Signal.from_arrays(t, y), spec, rng.uniform(1, 8), 0.3)
        r = y - res.evaluate(t)
        assert res.sse == pytest.approx(r @ r, rel=1e-8)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_model_nesting(self, seed):
        rng = np.random.default_rng(seed)
        t = np.linspace(0, 5, 300)
        spec = SplineSpec.equidistant(int(rng.integers(1, 5)), int(rng.integers(1, 6)), 0, 5)
        signal = Signal.from_arrays(t, rng.standard_normal(300))
        omega, tau = rng.uniform(0.5, 16), rng.uniform(0, 6)
        m1 = fit_fixed(1, signal, spec, omega, tau)
        m2 = fit_fixed(2, signal, spec, omega, tau)
        assert m2.sse <= m1.sse + 1e-10

    def test_constant_prototype_model2_uses_min_norm(self, eeg_grid):
        t, spec = eeg_grid
        res = fit_fixed(2, Signal.from_arrays(t, np.cos(t)), spec, 0, 0, prototype=Constant(2.0))
        assert res.verdict.status is Status.DEFICIENT
        assert res.method == "min_norm"

    def test_bad_model(self, eeg_grid):
        t, spec = eeg_grid
        with pytest.raises(ValueError):
            fit_fixed(3, Signal.from_arrays(t, t), spec, 1, 0)

    def test_signal_validation(self):
        with pytest.raises(ValueError):
            Signal.from_arrays([0, 1, 2], [1.0, 2.0])
        with pytest.raises(ValueError):
            Signal.from_arrays([0, 1], [1.0, np.nan])


class TestGridSearch:
    def test_single_cell(self, eeg_grid):
        t, spec = eeg_grid
        signal = Signal.from_arrays(t, np.cos(2 * t))
        best, table = grid_search(1, signal, spec, GridConfig.single(3.0, 0.25))
        ref = fit_fixed(1, signal, spec, 3.0, 0.25)
        assert len(table) == 1
        assert best.sse == ref.sse
        np.testing.assert_array_equal(best.coeffs, ref.coeffs)

    def test_recovers_generating_cell(self, eeg_grid):
        t, spec = eeg_grid
        x = np.random.default_rng(7).standard_normal(spec.n_coeffs)
        y = _wave(t, spec, x, 3.0, 0.5)
        cfg = GridConfig(1, 6, 1, 0, 1.5, 0.25)
        best, table = grid_search(1, Signal.from_arrays(t, y), spec, cfg)
        assert (best.omega, best.tau) == (3.0, 0.5)
        assert best.sse <= 1e-16 * (y @ y)
        assert len(table) == cfg.n_cells

    def test_ties_go_to_first_cell(self, eeg_grid):
        t, spec = eeg_grid
        cfg = GridConfig(2, 4, 1, 0, 1, 0.5)
        best, table = grid_search(2, Signal.from_arrays(t, np.zeros_like(t)), spec, cfg)
        assert (best.omega, best.tau) == cfg.cells()[0]
        assert all(c.sse == 0.0 for c in table)

    def test_parallel_matches_serial(self, eeg_grid):
        t, spec = eeg_grid
        y = np.random.default_rng(3).standard_normal(t.size)
        cfg = GridConfig(1, 4, 1, 0, 1, 0.5)
        _, serial = grid_search(2, Signal.from_arrays(t, y), spec, cfg)
        _, parallel = grid_search(2, Signal.from_arrays(t, y), spec, cfg, n_jobs=2)
        assert serial == parallel

    def test_table_reproducible_per_cell(self, eeg_grid):
        t, spec = eeg_grid
        signal = Signal.from_arrays(t, np.random.default_rng(5).standard_normal(t.size))
        _, table = grid_search(1, signal, spec, GridConfig(1, 2, 1, 0, 0.5, 0.5))
        for cell in table:
            assert fit_fixed(1, signal, spec, cell.omega, cell.tau).sse == cell.sse

    def test_refinement_never_worse(self, eeg_grid):
        t, spec = eeg_grid
        signal = Signal.from_arrays(t, np.random.default_rng(9).standard_normal(t.size))
        coarse, _ = grid_search(1, signal, spec, GridConfig(1, 5, 2, 0, 1, 1))
        fine, _ = grid_search(1, signal, spec, GridConfig(1, 5, 1, 0, 1, 0.5))
        assert fine.sse <= coarse.sse

    def test_shared_basis_matches_assembly(self, eeg_grid):
        t, spec = eeg_grid
        tm = TimeMap.unit_interval(t)
        np.testing.assert_array_equal(basis_matrix(tm(t), tm.apply_spec(spec))[:, 0], 1.0)
