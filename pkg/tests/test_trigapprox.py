"""Tests for summability kernels, Jackson approximation, Bernstein ratios and rate profiles"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.errors import DomainError
from app.models.fields import VectorField
from app.models.kernels import KernelKind, RateProfile, TrigKernel
from app.services import corpus, trigapprox, vectorfield

PERIOD = 2.0 * math.pi * np.arange(4096) / 4096


def period_integral(values):
    """Trapezoid rule on the periodic grid: exact for trigonometric polynomials of degree < 4096."""
    return 2.0 * math.pi * float(np.mean(values))


def test_fejer_kernel_values():
    assert trigapprox.fejer_kernel(5, 0.0) == pytest.approx(5 / (2 * math.pi))
    assert np.allclose(trigapprox.fejer_kernel(1, PERIOD), 1 / (2 * math.pi))
    for n in (1, 4, 33, 256):
        values = trigapprox.fejer_kernel(n, PERIOD)
        assert np.min(values) >= 0.0
        assert period_integral(values) == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(DomainError):
        trigapprox.fejer_kernel(0, 0.1)


@pytest.mark.parametrize("kind,mass", [(KernelKind.JACKSON_PAPER, -1.0), (KernelKind.JACKSON_VDP, 1.0)])
def test_jackson_kernel_mass_and_degree(kind, mass):
    for n in (1, 3, 16):
        values = trigapprox.jackson_kernel(n, PERIOD, kind)
        assert period_integral(values) == pytest.approx(mass, abs=1e-10)
        assert TrigKernel(n=n, kind=kind).mass == pytest.approx(mass)
        coeffs = np.abs(np.fft.rfft(values)) / values.size
        assert np.max(coeffs[2 * n:]) <= 1e-12


def test_kernel_multipliers():
    k = np.arange(0, 40)
    vdp = trigapprox.kernel_multipliers(TrigKernel(n=8), k)
    assert np.all(vdp[:9] == 1.0)
    assert np.all(vdp[16:] == 0.0)
    fejer = trigapprox.kernel_multipliers(TrigKernel(n=8, kind=KernelKind.FEJER), k)
    assert fejer[4] == pytest.approx(0.5)
    assert TrigKernel(n=8, kind=KernelKind.FEJER).trig_degree == 7


def test_multipliers_match_kernel_samples():
    kernel = TrigKernel(n=5)
    values = kernel(PERIOD)
    coeffs = np.fft.rfft(values) / values.size * 2 * math.pi
    assert np.allclose(coeffs.real[:12], kernel.multipliers(np.arange(12)), atol=1e-12)


def test_approximation_reproduces_low_degrees(rng):
    n = 6
    V = VectorField.trig(0.7, rng.normal(size=n).tolist(), rng.normal(size=n).tolist())
    approx = trigapprox.approximate(V, n)
    assert approx.a0 == pytest.approx(0.7)
    assert np.allclose(approx(PERIOD), V(PERIOD), atol=1e-12)
    assert trigapprox.approximate(VectorField.trig(2.5), 4)(PERIOD[:5]) == pytest.approx([2.5] * 5)


@given(st.integers(1, 40), st.sampled_from(list(KernelKind)))
@settings(max_examples=30, deadline=None)
def test_approximation_degree_bound(n, kind):
    approx = trigapprox.approximate(corpus.weierstrass_field(), n, kind)
    assert approx.degree <= 2 * n - 1
    approx = trigapprox.approximate(corpus.abs_sin_field(), n, kind)
    assert approx.degree <= 2 * n - 1


def test_closed_form_approximation_converges():
    V = corpus.abs_sin_field()
    errors = [trigapprox.sup_norm(lambda x, n=n: V(x) - trigapprox.approximate(V, n)(x)) for n in (4, 16, 64)]
    assert errors[0] > errors[1] > errors[2]


def test_bernstein_equality_and_bound():
    for n in (1, 5, 12):
        V = VectorField.trig(0.0, [0.0] * n, [0.0] * (n - 1) + [1.0])
        assert trigapprox.bernstein_ratio(V) == pytest.approx(1.0, abs=1e-9)
    assert trigapprox.bernstein_ratio(VectorField.trig(0.0, [1.0, 0.0], [0.0, 1.0])) <= 1.0 + 1e-6


def test_bernstein_ratio_on_random_polynomials(rng):
    for _ in range(100):
        n = int(rng.integers(1, 33))
        a = rng.normal(size=n)
        b = rng.normal(size=n)
        a[-1] += 1.0
        V = VectorField.trig(float(rng.normal()), a.tolist(), b.tolist())
        assert trigapprox.bernstein_ratio(V) <= 1.0 + 1e-6


def test_bernstein_ratio_needs_degree():
    with pytest.raises(DomainError):
        trigapprox.bernstein_ratio(VectorField.trig(0.0))
    with pytest.raises(DomainError):
        trigapprox.bernstein_ratio(VectorField.trig(1.0))


def test_weierstrass_rate_is_bounded(weierstrass):
    profile = trigapprox.rate_profile(weierstrass, [4, 8, 16, 32, 64, 128, 256])
    assert profile.spread() < 10.0
    assert 0.5 <= profile.bound <= 2.0
    implied = trigapprox.zygmund_from_rate(profile)
    assert implied == pytest.approx(20.0 * profile.bound)
    x = np.linspace(0.0, 2 * math.pi, 257)
    measured = vectorfield.zygmund_seminorm(weierstrass, x, [2.0 ** -k for k in range(24)])
    assert measured <= 1.1 * implied


def test_rate_profiles_of_other_fields():
    trig = trigapprox.rate_profile(VectorField.trig(0.0, [1.0, 2.0], [0.0, -1.0]), [2, 4, 8])
    assert trig.error[-1] <= 1e-12
    lipschitz = trigapprox.rate_profile(corpus.abs_sin_field(), [4, 8, 16, 32, 64])
    assert lipschitz.spread() < 10.0
    with pytest.raises(DomainError):
        trigapprox.rate_profile(corpus.abs_sin_field(), [8, 4])


def test_rate_profile_model():
    profile = RateProfile(n=[2, 4], error=[0.5, 0.0])
    assert profile.scaled == [1.0, 0.0]
    assert profile.spread() == 1.0
    assert profile.rows() == [[2, 0.5, 1.0], [4, 0.0, 0.0]]
    with pytest.raises(ValueError):
        RateProfile(n=[4, 2], error=[0.1, 0.1])


def test_magnify():
    V = VectorField.trig(0.0, [0.0], [1.0], name="sin")
    assert trigapprox.magnify(V, 0, (0.0, 2 * math.pi))(PERIOD) == pytest.approx(V(PERIOD))
    M = trigapprox.magnify(V, 3, (0.0, math.pi / 4))
    window = np.linspace(0.0, math.pi / 4, 65)
    assert np.allclose(M(window), np.sin(8 * window) / 8, atol=1e-15)
    closed = trigapprox.magnify(corpus.abs_sin_field(), 2, (1.0, 1.0 + math.pi / 2))
    assert closed(np.asarray(1.3)) == pytest.approx(abs(math.sin(5.2)) / 4)
    with pytest.raises(DomainError):
        trigapprox.magnify(V, 3, (0.0, 1.0))
    with pytest.raises(DomainError):
        trigapprox.magnify(V, -1, (0.0, 4 * math.pi))


def test_magnified_field_lives_on_its_interval():
    V = VectorField.trig(0.0, [0.0, 1.0], [1.0, 0.0], name="mixed")
    interval = (0.5, 0.5 + math.pi / 8)
    M = trigapprox.magnify(V, 4, interval)
    assert M(np.asarray(interval[1])) == pytest.approx(float(V(np.asarray(16 * interval[1]))) / 16)
    with pytest.raises(DomainError, match="defined on"):
        M(np.asarray(0.2))
    with pytest.raises(DomainError):
        M(np.array([0.6, 0.5 + math.pi / 4]))
    closed = trigapprox.magnify(corpus.abs_sin_field(), 1, (0.0, math.pi))
    with pytest.raises(DomainError):
        closed(np.asarray(-0.1))


def test_magnified_polynomial_shows_no_oscillation(rng):
    n = 3
    degree = 2 ** n
    V = VectorField.trig(0.0, rng.normal(size=degree).tolist(), rng.normal(size=degree).tolist())
    norm = trigapprox.sup_norm(V)
    for k in (4, 6, 8):
        lo = 0.37
        interval = (lo, lo + 2 * math.pi / 2 ** k)
        M = trigapprox.magnify(V, k, interval)
        bound = (interval[1] - interval[0]) * degree * norm
        assert trigapprox.interval_oscillation(M, interval) <= bound + 1e-12
    assert trigapprox.interval_oscillation(np.cos, (0.0, 2 * math.pi)) == pytest.approx(2.0)
