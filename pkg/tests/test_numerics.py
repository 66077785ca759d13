"""Tests for half-plane quadrature, circle principal values and second differences"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.errors import ConvergenceError, DomainError
from app.models.grids import HalfPlaneGrid, Tolerance, primitive_by_quadrature
from app.services.numerics import (
    halfplane_tail,
    integrate_halfplane,
    pv_circle_integral,
    second_difference,
)


@pytest.fixture
def gaussian_grid():
    return HalfPlaneGrid.symmetric(10.0, 1e-4, y_max=10.0)


def weighted_gaussian(z):
    return z.imag * np.exp(-np.abs(z) ** 2)


def test_gaussian_moment(gaussian_grid):
    result = integrate_halfplane(weighted_gaussian, gaussian_grid)
    assert result.converged
    assert result.value.real == pytest.approx(math.sqrt(math.pi) / 2, abs=1e-7)
    assert result.value.imag == 0.0
    assert result.components is None


def test_stacked_integrand_components(gaussian_grid):
    def stacked(z):
        g = weighted_gaussian(z)
        return np.vstack([g, 2.0 * g, 1j * g])

    result = integrate_halfplane(stacked, gaussian_grid)
    first, second, third = result.components
    assert second == pytest.approx(2.0 * first, rel=1e-12)
    assert third == pytest.approx(1j * first, rel=1e-12)
    assert result.value == first


def test_repeatable_to_the_last_bit(gaussian_grid):
    a = integrate_halfplane(weighted_gaussian, gaussian_grid)
    b = integrate_halfplane(weighted_gaussian, gaussian_grid)
    assert a.value == b.value and a.error == b.error


def test_non_finite_integrand(gaussian_grid):
    with pytest.raises(DomainError, match="not finite"):
        integrate_halfplane(lambda z: np.where(z.real > 1.0, np.nan, 1.0), gaussian_grid)


def test_wrong_shape(gaussian_grid):
    with pytest.raises(DomainError):
        integrate_halfplane(lambda z: np.ones(3), gaussian_grid)


def test_non_convergence_is_flagged_not_raised():
    grid = HalfPlaneGrid.symmetric(5.0, 1e-2, y_max=5.0, order=1, order_step=1)
    tol = Tolerance(abs_tol=1e-15, rel_tol=1e-15, max_depth=1)
    result = integrate_halfplane(lambda z: np.cos(40.0 * z.real) * np.exp(-z.imag), grid, tol)
    assert result.levels == 2
    assert not result.converged
    assert result.error > 0.0


def test_tail_decreases_with_extent():
    small = halfplane_tail(HalfPlaneGrid.symmetric(10.0, 1e-3), 1.0, 4.0)
    large = halfplane_tail(HalfPlaneGrid.symmetric(100.0, 1e-3), 1.0, 4.0)
    assert 0.0 < large < small
    # |z|^-4 tail beyond a box of half-width R is of order R^-2
    assert small == pytest.approx(large * 100.0, rel=1e-6)
    assert halfplane_tail(HalfPlaneGrid(), 0.0, 3.0) == 0.0


def test_tail_needs_integrable_decay():
    with pytest.raises(DomainError):
        halfplane_tail(HalfPlaneGrid(), 1.0, 2.0)


def test_tail_correction_moves_into_value():
    grid = HalfPlaneGrid.symmetric(20.0, 1e-3, y_max=20.0)
    f = lambda z: np.zeros(z.shape)  # noqa: E731
    plain = integrate_halfplane(f, grid, decay=(1.0, 3.0))
    corrected = integrate_halfplane(f, grid, decay=(1.0, 3.0), correct_tail=True)
    assert plain.value == 0.0 and plain.error == pytest.approx(plain.tail)
    assert corrected.value.real == pytest.approx(corrected.tail)



SMOOTH_GRID = HalfPlaneGrid.symmetric(6.0, 1e-2, y_max=6.0)


def shifted_gaussian(z):
    return np.exp(-np.abs(z - (0.5 + 1j)) ** 2)


@given(st.floats(min_value=-3.0, max_value=3.0), st.floats(min_value=-3.0, max_value=3.0))
@settings(max_examples=15, deadline=None)
def test_quadrature_is_linear(a, b):
    f = integrate_halfplane(weighted_gaussian, SMOOTH_GRID)
    g = integrate_halfplane(shifted_gaussian, SMOOTH_GRID)
    combined = integrate_halfplane(lambda z: a * weighted_gaussian(z) + b * shifted_gaussian(z), SMOOTH_GRID)

    expected = a * f.value + b * g.value
    allowed = abs(a) * f.error + abs(b) * g.error + combined.error
    assert abs(combined.value - expected) <= allowed + 1e-12 * (abs(a * f.value) + abs(b * g.value)) + 1e-15


def test_error_estimate_shrinks_with_depth():
    grid = HalfPlaneGrid(x_min=-4.0, x_max=4.0, y_min=1e-2, y_max=4.0, graded=False,
                         order=2, order_step=2, max_dx=1.0, max_dy=1.0)
    errors = []
    for depth in range(1, 6):
        tol = Tolerance(abs_tol=1e-30, rel_tol=1e-30, max_depth=depth)
        result = integrate_halfplane(weighted_gaussian, grid, tol)
        assert result.levels == depth + 1
        errors.append(result.error)
    for coarse, fine in zip(errors, errors[1:]):
        assert fine <= coarse + 1e-14
    assert errors[-1] < 1e-3 * errors[0]

def test_pv_cotangent_example():
    # sin(y) cot(y/2) = 1 + cos(y) once the singular factor cancels
    tight = Tolerance(abs_tol=1e-12, rel_tol=1e-10)
    value = pv_circle_integral(lambda y: np.sin(y) / np.tan(0.5 * y), 0.0, tight)
    assert value == pytest.approx(2.0 * math.pi, rel=1e-9)
    assert value / (2.0 * math.pi) == pytest.approx(1.0, rel=1e-9)


@given(st.floats(min_value=-3.0, max_value=3.0))
@settings(max_examples=20, deadline=None)
def test_pv_matches_conjugate_of_cosine(x):
    # (1/2π) PV∫ cos(y) cot((y-x)/2) dy = -sin(x)
    value = pv_circle_integral(lambda y: np.cos(y) / np.tan(0.5 * (y - x)), x) / (2.0 * math.pi)
    assert value == pytest.approx(-math.sin(x), abs=1e-6)


def test_pv_rejects_singularities_away_from_x():
    with pytest.raises(DomainError):
        pv_circle_integral(lambda y: np.where(np.abs(y - 2.0) < 0.3, np.inf, 1.0), 0.0)


def test_second_difference_of_quadratic():
    assert second_difference(lambda x: x * x, 0.7, 0.25) == pytest.approx(2 * 0.25 ** 2)
    values = second_difference(np.sin, np.zeros(3), np.array([0.1, 0.2, 0.3]))
    assert values.shape == (3,)
    with pytest.raises(DomainError):
        second_difference(np.sin, 0.0, 0.0)


@pytest.mark.parametrize("scale", [1e-20, 1.0, 1e12])
def test_primitive_tolerance_follows_integrand_scale(scale):
    x = np.linspace(-20.0, 20.0, 9)
    value = primitive_by_quadrature(lambda u: scale * np.cos(u), x)
    assert value == pytest.approx(scale * np.sin(x), rel=1e-9, abs=1e-9 * scale)


def test_primitive_of_zero_integrand():
    x = np.array([[0.5, 3.0], [-2.0, 7.0]])
    value = primitive_by_quadrature(lambda u: np.zeros_like(u), x)
    assert value.shape == (2, 2)
    assert np.all(value == 0.0)
    assert primitive_by_quadrature(lambda u: np.zeros_like(u), 4.0) == 0.0


def test_primitive_reports_exhausted_interval_budget():
    with pytest.raises(ConvergenceError, match="primitive quadrature"):
        primitive_by_quadrature(lambda u: np.abs(u - 0.3) ** 0.5, np.array([1.0, 2.0]),
                                rel_tol=1e-14, limit=2)
