"""Piecewise-linear intensity functions: evaluation, integration, validation."""

import numpy as np
import pytest

from gridres import RateFunction, failure_time_pdf


def test_constant_factory():
    rf = RateFunction.constant(5.0, 20.0)
    assert rf.horizon == 20.0
    assert rf.value(0.0) == 5.0
    assert rf.value(13.7) == 5.0
    assert rf.total == pytest.approx(100.0)


def test_knot_validation():
    with pytest.raises(ValueError):
        RateFunction(knots=(), horizon=10.0)
    with pytest.raises(ValueError):
        RateFunction(knots=((0.0, 1.0), (0.0, 2.0)), horizon=10.0)
    with pytest.raises(ValueError):
        RateFunction(knots=((2.0, 1.0), (1.0, 2.0)), horizon=10.0)
    with pytest.raises(ValueError):
        RateFunction(knots=((0.0, -0.5),), horizon=10.0)
    with pytest.raises(ValueError):
        RateFunction(knots=((0.0, 1.0), (5.0, 2.0)), horizon=4.0)
    with pytest.raises(ValueError):
        RateFunction(knots=((-1.0, 1.0), (5.0, 2.0)), horizon=10.0)
    with pytest.raises(ValueError):
        RateFunction(knots=((0.0, 1.0),), horizon=0.0)


def test_interpolation_and_extrapolation():
    rf = RateFunction(knots=((2.0, 4.0), (6.0, 8.0)), horizon=10.0)
    # linear between knots
    assert rf.value(4.0) == pytest.approx(6.0)
    assert rf.value(2.0) == 4.0
    assert rf.value(6.0) == 8.0
    # constant extrapolation on both sides of the knot span
    assert rf.value(0.0) == 4.0
    assert rf.value(1.0) == 4.0
    assert rf.value(9.5) == 8.0
    with pytest.raises(ValueError):
        rf.value(-0.1)
    with pytest.raises(ValueError):
        rf.value(10.5)


def test_value_vectorized():
    rf = RateFunction(knots=((0.0, 1.0), (10.0, 3.0)), horizon=10.0)
    t = np.array([0.0, 5.0, 10.0])
    np.testing.assert_allclose(rf.value(t), [1.0, 2.0, 3.0])


def test_cumulative_hand_computed():
    # ramp 0 -> 4 over [0, 2], then constant 4 to horizon 5
    rf = RateFunction(knots=((0.0, 0.0), (2.0, 4.0)), horizon=5.0)
    assert rf.cumulative(0.0) == 0.0
    assert rf.cumulative(1.0) == pytest.approx(1.0)  # triangle 0.5*1*2
    assert rf.cumulative(2.0) == pytest.approx(4.0)
    assert rf.cumulative(5.0) == pytest.approx(4.0 + 3.0 * 4.0)
    assert rf.total == pytest.approx(16.0)


def test_cumulative_with_leading_flat_segment():
    # first knot at t=2: constant extrapolation backwards must be integrated
    rf = RateFunction(knots=((2.0, 3.0), (4.0, 5.0)), horizon=6.0)
    assert rf.cumulative(2.0) == pytest.approx(6.0)
    assert rf.cumulative(4.0) == pytest.approx(6.0 + 8.0)
    assert rf.cumulative(6.0) == pytest.approx(14.0 + 10.0)


def test_cumulative_matches_fine_trapezoid():
    rng = np.random.default_rng(42)
    for _ in range(20):
        n = rng.integers(2, 6)
        times = np.sort(rng.uniform(0.0, 18.0, n))
        times += np.arange(n) * 1e-3  # enforce strict increase
        vals = rng.uniform(0.0, 9.0, n)
        rf = RateFunction(knots=tuple(zip(times, vals)), horizon=20.0)
        grid = np.linspace(0.0, 20.0, 200_001)
        ref = np.trapezoid(rf.value(grid), grid)
        assert rf.total == pytest.approx(ref, abs=1e-6)


def test_integral_additivity():
    rng = np.random.default_rng(7)
    rf = RateFunction(knots=((0.0, 2.0), (5.0, 0.5), (9.0, 4.0)), horizon=12.0)
    for _ in range(50):
        a, b, c = np.sort(rng.uniform(0.0, 12.0, 3))
        whole = rf.integral(a, c)
        split = rf.integral(a, b) + rf.integral(b, c)
        assert whole == pytest.approx(split, abs=1e-12)


def test_peak_and_scaled():
    rf = RateFunction(knots=((0.0, 2.0), (3.0, 7.0), (8.0, 1.0)), horizon=9.0)
    assert rf.peak == 7.0
    doubled = rf.scaled(2.0)
    assert doubled.peak == 14.0
    assert doubled.total == pytest.approx(2.0 * rf.total)
    with pytest.raises(ValueError):
        rf.scaled(-1.0)


def test_failure_time_pdf_normalizes():
    rf = RateFunction(knots=((0.0, 1.0), (6.0, 5.0), (15.0, 2.0)), horizon=15.0)
    pdf = failure_time_pdf(rf)
    grid = np.linspace(0.0, 15.0, 30_001)
    mass = np.trapezoid(pdf.value(grid), grid)
    assert mass == pytest.approx(1.0, abs=1e-6)
    # proportional to the intensity
    assert pdf.value(6.0) / pdf.value(0.0) == pytest.approx(5.0)


def test_failure_time_pdf_degenerate():
    flat = RateFunction(knots=((0.0, 0.0),), horizon=4.0)
    with pytest.raises(ValueError, match="degenerate intensity"):
        failure_time_pdf(flat)
