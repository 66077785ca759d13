"""Tests for the three Hilbert transform routes and the rotated coefficient"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.errors import DomainError
from app.models.differentials import TwoSidedBeltrami
from app.models.fields import Chart, VectorField
from app.models.grids import HalfPlaneGrid, Tolerance
from app.services import corpus, hilbert, vectorfield

ANGLES = 2.0 * math.pi * np.arange(64) / 64


def harmonic(k, cosine=False):
    coeffs = [0.0] * k
    other = [0.0] * k
    coeffs[k - 1] = 1.0
    return VectorField.trig(0.0, coeffs, other) if cosine else VectorField.trig(0.0, other, coeffs)


def test_fourier_route_on_harmonics():
    for k in (1, 2, 7):
        J = hilbert.hilbert_fourier(harmonic(k))
        assert J.a[k - 1] == 1.0 and J.b[k - 1] == 0.0
        J = hilbert.hilbert_fourier(harmonic(k, cosine=True))
        assert J.a[k - 1] == 0.0 and J.b[k - 1] == -1.0
    constant = hilbert.hilbert_fourier(VectorField.trig(3.0))
    assert constant.a0 == 0.0 and constant.degree == 0


@given(st.lists(st.floats(-2.0, 2.0), min_size=1, max_size=16), st.lists(st.floats(-2.0, 2.0), min_size=1, max_size=16))
@settings(max_examples=40, deadline=None)
def test_fourier_route_is_anti_involutive(a, b):
    V = VectorField.trig(1.5, a, b)
    twice = hilbert.hilbert_fourier(hilbert.hilbert_fourier(V))
    assert twice.a == [-v for v in V.a]
    assert twice.b == [-v for v in V.b]


def test_pv_route_examples():
    x = np.linspace(0.0, 2.0 * math.pi, 37)
    sin_pv = hilbert.hilbert_pv(harmonic(1), x)
    assert np.max(np.abs(sin_pv.as_array() - np.cos(x))) <= 1e-4
    cos_pv = hilbert.hilbert_pv(harmonic(2, cosine=True), x)
    assert np.max(np.abs(cos_pv.as_array() + np.sin(2 * x))) <= 1e-4
    const = hilbert.hilbert_pv(VectorField.trig(2.0), x)
    assert np.max(np.abs(const.as_array())) <= 1e-10
    assert sin_pv.chart == Chart.ANGLE.value
    assert hilbert.hilbert_pv(harmonic(1), [0.0]).values[0] == pytest.approx(1.0, abs=1e-10)


def test_pv_route_matches_fourier_on_weierstrass(weierstrass):
    pv = hilbert.hilbert_pv(weierstrass, ANGLES)
    exact = hilbert.hilbert_fourier(weierstrass)(ANGLES)
    assert np.max(np.abs(pv.as_array() - exact)) <= 1e-8


def test_adaptive_pv_route():
    x = [0.3, 2.0, 4.5]
    tol = Tolerance(abs_tol=1e-12, rel_tol=1e-10, max_depth=3)
    pv = hilbert.hilbert_pv(harmonic(3), x, tol=tol, method="adaptive")
    assert np.allclose(pv.as_array(), np.cos(3 * np.asarray(x)), atol=1e-6)


def test_pv_route_twice_negates():
    rng = np.random.default_rng(5)
    V = VectorField.trig(0.0, rng.normal(size=16).tolist(), rng.normal(size=16).tolist())
    once = hilbert.hilbert_pv(V, ANGLES)
    twice = hilbert.hilbert_pv(VectorField.sampled(once.values), ANGLES)
    assert np.max(np.abs(twice.as_array() + V(ANGLES))) <= 2e-4


def test_pv_route_is_linear():
    V, W = harmonic(2), corpus.abs_sin_field()
    x = np.linspace(0.1, 6.0, 11)
    combined = VectorField.closed_form(lambda y: 2.0 * V(y) - 3.0 * W(y))
    lhs = hilbert.hilbert_pv(combined, x).as_array()
    rhs = 2.0 * hilbert.hilbert_pv(V, x).as_array() - 3.0 * hilbert.hilbert_pv(W, x).as_array()
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_pv_route_preconditions():
    with pytest.raises(DomainError):
        hilbert.hilbert_pv(corpus.sin_line_field(), [0.0])
    with pytest.raises(DomainError):
        hilbert.hilbert_pv(harmonic(1), [0.0], nodes=7)
    with pytest.raises(DomainError):
        hilbert.hilbert_pv(harmonic(1), [0.0], method="fft")


def test_transform_preserves_zygmund_class(weierstrass):
    J = hilbert.hilbert_fourier(weierstrass)
    t = np.geomspace(1e-3, 1.0, 40)
    coarse = vectorfield.zygmund_seminorm(J, np.linspace(0.0, 2 * math.pi, 257), t)
    fine = vectorfield.zygmund_seminorm(J, np.linspace(0.0, 2 * math.pi, 1025), t)
    assert math.isfinite(fine)
    assert coarse <= fine <= 1.5 * coarse


def test_rotation_keeps_sup_norm():
    mu = corpus.random_coefficient(3)
    rotated = hilbert.rotate_coefficient(mu)
    z = np.array([0.2 + 0.5j, -3.0 + 0.01j, 1.0 - 2.0j, 4.0 - 0.3j])
    assert np.array_equal(np.abs(rotated(z)), np.abs(mu(z)))
    assert rotated.sup_norm() == mu.sup_norm()
    assert np.allclose(rotated(z[:2]), 1j * mu(z[:2]))
    assert np.allclose(rotated(z[2:]), -1j * mu(z[2:]))


def symmetric_bump(c, center=0.5 + 1.0j, radius=0.5, power=8):
    bump = corpus.radial_bump(center, radius, c, power=power)
    return TwoSidedBeltrami.symmetric(bump.upper, name="bump", sup_bound=abs(c))


def test_beltrami_route_on_zero_coefficient():
    zero = TwoSidedBeltrami.symmetric(lambda z: np.zeros_like(np.asarray(z, dtype=complex)), name="zero")
    samples = hilbert.hilbert_via_beltrami(zero, [-1.0, 2.0], grid=HalfPlaneGrid.symmetric(4.0, 1e-3, y_max=4.0))
    assert samples.values == [0.0, 0.0]
    assert samples.chart == Chart.LINE.value


def test_beltrami_route_rejects_asymmetric_coefficients():
    bump = corpus.radial_bump(0.5 + 1.0j, 0.5, 0.3)
    with pytest.raises(DomainError):
        hilbert.hilbert_via_beltrami(bump, [2.0])
    with pytest.raises(DomainError):
        hilbert.hilbert_via_beltrami(bump, [2.0], probe=[0.5 + 1.0j])


@pytest.mark.slow
def test_beltrami_route_matches_mean_value_closed_form(bump_grid):
    c, center, radius = 0.3 + 0.2j, 0.5 + 1.0j, 0.5
    mu = symmetric_bump(c, center, radius)
    mass = corpus.bump_mass(radius, 1.0, power=8)
    xs = np.array([-1.0, 0.5, 2.0, 3.0])
    tol = Tolerance(abs_tol=1e-10, rel_tol=1e-6, max_depth=2)
    samples = hilbert.hilbert_via_beltrami(mu, xs, grid=bump_grid, tol=tol)

    # radial weights integrate holomorphic kernels to their value at the centre
    f = 1.0 / (center * (center - 1.0) * (center - xs))
    expected = -(2.0 * mass * xs * (xs - 1.0) / math.pi) * np.imag(c * f)
    assert np.allclose(samples.as_array(), expected, rtol=1e-3, atol=1e-8)


def test_beltrami_route_flags_unconverged_points():
    mu = symmetric_bump(0.3 + 0.2j)
    tight = Tolerance(abs_tol=1e-15, rel_tol=1e-15, max_depth=1)
    samples = hilbert.hilbert_via_beltrami(mu, [-1.0, 2.0], grid=HalfPlaneGrid.symmetric(4.0, 1e-2, y_max=4.0),
                                           tol=tight)
    assert not samples.converged
    assert samples.error > 0.0


def test_field_coefficient_is_symmetric_with_sampled_bound():
    grid = HalfPlaneGrid.symmetric(4.0, 1e-2, y_max=4.0)
    mu = hilbert.field_coefficient(harmonic(2), grid)
    z = np.array([0.3 + 0.4j, -1.5 + 2.0j, 2.5 + 0.1j])
    assert mu.symmetry_defect(z) <= 1e-12
    assert 0.0 < mu.sup_bound < math.inf
    nodes = grid.points()
    assert mu.sup_bound == pytest.approx(float(np.max(np.abs(mu(nodes)))))


def test_route_agreement_preconditions():
    with pytest.raises(DomainError, match="four points"):
        hilbert.beltrami_agreement(harmonic(2), [-1.0, 2.0, 3.0])
    with pytest.raises(DomainError, match="0 and 1"):
        hilbert.beltrami_agreement(harmonic(2), [-1.0, 0.0, 2.0, 3.0])
    with pytest.raises(DomainError):
        hilbert.beltrami_agreement(corpus.sin_line_field(), [-1.0, 0.5, 2.0, 3.0])


@pytest.mark.slow
@pytest.mark.parametrize("k", [2, 3])
def test_beltrami_route_matches_fourier_modulo_quadratics(k):
    # sin kx through the averaging extension's coefficient, on a compact grid
    grid = HalfPlaneGrid.symmetric(30.0, 1e-3, y_max=30.0)
    tol = Tolerance(abs_tol=1e-9, rel_tol=1e-6, max_depth=2)
    agreement = hilbert.beltrami_agreement(harmonic(k), [-2.0, -0.5, 0.5, 2.0, 3.0], grid, tol)

    assert agreement.residual < 1e-3
    assert max(abs(v) for v in agreement.fourier) > 0.1
    assert len(agreement.neg_v_mu_hat) == 5
