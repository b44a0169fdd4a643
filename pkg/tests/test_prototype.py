import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modspline import (Constant, Sinusoid, SplineSpec, Tabulated, TimeGrid, assign_intervals,
                       count_zero_samples, sample, sinusoid_zero_bound)


def test_sample_constant():
    s = sample(Constant(1.0), TimeGrid([0, 1, 2, 3]))
    assert s.alpha.tolist() == [1.0] * 4


def test_sample_sinusoid():
    s = sample(Sinusoid(np.pi), TimeGrid([0, 1, 2]))
    np.testing.assert_allclose(s.alpha, 0.0, atol=1e-15)
    assert sample(Sinusoid(np.pi / 2), TimeGrid([0.0, 1.0])).alpha[1] == 1.0


def test_tabulated_length_mismatch():
    with pytest.raises(ValueError, match="tabulated prototype has 2 values"):
        sample(Tabulated([1.0, 2.0]), TimeGrid([0, 1, 2]))


def _zero_setup(proto, times=(0, 0.5, 1, 1.5, 2), knots=(0, 1, 2)):
    grid = TimeGrid(times)
    spec = SplineSpec(1, knots)
    return sample(proto, grid), assign_intervals(grid, spec)


@pytest.mark.parametrize("c, expected", [(0.0, [3, 2]), (5.0, [0, 0])])
def test_count_zero_constant(c, expected):
    s, a = _zero_setup(Constant(c))
    assert count_zero_samples(s, a).tolist() == expected


def test_count_zero_sinusoid_matches_enumeration():
    times = (0, 0.5, 1, 1.5, 2)
    s, a = _zero_setup(Sinusoid(np.pi, 0.0), times)
    # independent enumeration
    values = [math.sin(math.pi * t) for t in times]
    zero = [abs(v) <= 1e-9 for v in values]
    expected = [sum(zero[:3]), sum(zero[3:])]
    assert expected == [2, 1]
    assert count_zero_samples(s, a, 1e-9).tolist() == expected


def test_rounding_noise_counts_as_zero():
    # sin(pi * i) is pure rounding noise; the sinusoid's unit amplitude sets the scale
    grid = TimeGrid(np.arange(10.0))
    s = sample(Sinusoid(np.pi), grid)
    a = assign_intervals(grid, SplineSpec(1, [0, 9]))
    assert count_zero_samples(s, a).tolist() == [10]
    assert s.is_constant()


def test_tabulated_scale_is_relative():
    grid = TimeGrid([0, 1, 2])
    s = sample(Tabulated([1e-20, 2e-20, 0.0]), grid)
    a = assign_intervals(grid, SplineSpec(1, [0, 2]))
    assert count_zero_samples(s, a).tolist() == [1]


@pytest.mark.parametrize("omega, duration, expected", [(16, 2, 65), (0, 10, 1), (1, 1, 3)])
def test_zero_bound(omega, duration, expected):
    assert sinusoid_zero_bound(omega, duration) == expected


def test_zero_bound_rejects():
    with pytest.raises(ValueError):
        sinusoid_zero_bound(1, 0)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), omega=st.floats(0.01, 40), tau=st.floats(0, 2 * np.pi))
def test_exact_zeros_within_bound(seed, omega, tau):
    rng = np.random.default_rng(seed)
    t = np.unique(rng.uniform(0, 5, 200))
    grid = TimeGrid(t)
    s = sample(Sinusoid(omega, tau), grid)
    a = assign_intervals(grid, SplineSpec.equidistant(2, 3, t[0], t[-1]))
    assert count_zero_samples(s, a, 0.0).sum() <= sinusoid_zero_bound(omega, t[-1] - t[0])


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), e1=st.floats(0, 1), e2=st.floats(0, 1))
def test_zero_count_monotone_in_threshold(seed, e1, e2):
    rng = np.random.default_rng(seed)
    grid = TimeGrid(np.sort(rng.uniform(0, 1, 50)) + np.arange(50) * 1e-3)
    s = sample(Tabulated(rng.standard_normal(50)), grid)
    a = assign_intervals(grid, SplineSpec.equidistant(1, 4, grid.times[0], grid.times[-1]))
    lo, hi = sorted((e1, e2))
    assert np.all(count_zero_samples(s, a, lo) <= count_zero_samples(s, a, hi))
