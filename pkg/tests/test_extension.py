"""Tests for the averaging extension, Beltrami coefficients and dilatation"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.errors import DomainError, InvariantViolation
from app.models.fields import Chart, VectorField
from app.models.maps import PlaneExtension
from app.services import corpus, extension


def test_identity_extends_to_identity(lattice):
    z = lattice.points()
    assert z.size == 100 * 100
    H = extension.ba_extend(corpus.identity_map())
    assert np.max(np.abs(H(z) - z)) <= 1e-12


def test_undoubled_identity(lattice):
    z = lattice.points()
    H = extension.ba_extend(corpus.identity_map(), doubled=False)
    assert np.max(np.abs(H(z) - (z.real + 0.5j * z.imag))) <= 1e-12


def test_linear_map_extends_linearly(lattice):
    z = lattice.points()
    H = extension.ba_extend(corpus.affine_map(2.0))
    assert np.max(np.abs(H(z) - 2.0 * z)) <= 1e-12


def test_reflection_and_boundary_values():
    H = extension.ba_extend(corpus.power_map(3.0))
    z = np.array([0.3 + 0.2j, -1.1 + 0.05j, 2.0 + 1.5j])
    assert np.array_equal(H(np.conj(z)), np.conj(H(z)))
    assert H(0.5 + 0j) == pytest.approx(0.125)
    assert np.all(H(z).imag > 0)


def test_stretch_dilatation():
    K = 3.0
    H = extension.affine_stretch(K)
    z = np.array([0.1 + 0.5j, -2.0 + 1.0j, 4.0 + 0.01j])
    assert np.allclose(extension.local_dilatation(H, z), K, atol=1e-8)
    field = extension.beltrami_of(H, z)
    assert np.allclose(field.mu, (1 - K) / (1 + K), atol=1e-8)
    assert extension.max_dilatation(H, z) == pytest.approx(K, abs=1e-8)
    with pytest.raises(DomainError):
        extension.affine_stretch(0.0)


def test_identity_coefficient_vanishes(lattice):
    field = extension.beltrami_of(extension.ba_extend(corpus.identity_map()), lattice)
    assert field.mu_sup < 1e-8
    assert field.k_max == pytest.approx(1.0, abs=1e-7)
    assert field.consistency_defect() < 1e-12
    assert len(field.rows()[0]) == 5


def test_square_root_map_is_quasiconformal(small_lattice):
    field = extension.beltrami_of(extension.ba_extend(corpus.power_map(0.5)), small_lattice)
    assert 0.0 < field.mu_sup < 1.0


def test_corpus_dilatations_are_finite(small_lattice, line_maps, circle_maps):
    for h in line_maps + circle_maps:
        k = extension.max_dilatation(extension.ba_extend(h), small_lattice)
        assert 1.0 <= k < math.inf


def test_orientation_failure_is_reported():
    flip = PlaneExtension(name="flip", boundary=corpus.identity_map(), evaluator=lambda z: np.conj(z))
    with pytest.raises(InvariantViolation):
        extension.local_dilatation(flip, np.array([0.5 + 0.5j]))
    with pytest.raises(InvariantViolation):
        extension.beltrami_of(flip, np.array([0.5 + 0.5j]))


def test_derivative_preconditions():
    H = extension.ba_extend(corpus.identity_map())
    with pytest.raises(DomainError):
        extension.derivatives(H, np.array([1.0 + 0j]))
    with pytest.raises(DomainError):
        extension.derivatives(H, np.array([1.0 + 0.1j]), step=0.2)


@given(
    st.sampled_from([corpus.power_map(3.0), corpus.piecewise_linear_map(2.0), corpus.circle_smooth_map(0.4)]),
    st.floats(0.5, 2.0), st.floats(-1.0, 1.0), st.floats(0.5, 2.0), st.floats(-1.0, 1.0),
)
@settings(max_examples=20, deadline=None)
def test_affine_naturality(h, a0, a1, b0, b1):
    z = np.array([x + 1j * y for x in np.linspace(-2.0, 2.0, 9) for y in (0.1, 0.5, 1.5)])
    assert extension.naturality_defect(h, (a0, a1), (b0, b1), z) <= 1e-9


def test_periodicity(small_lattice, circle_maps):
    for h in circle_maps:
        assert extension.periodicity_defect(extension.ba_extend(h), small_lattice) <= 1e-9
    with pytest.raises(DomainError):
        extension.periodicity_defect(extension.ba_extend(corpus.power_map(2.0)), small_lattice)


def test_asymptotic_property_of_smooth_circle_map():
    H = extension.ba_extend(corpus.circle_smooth_map(0.3))
    profile = extension.asymptotic_profile(H, [0.2, 0.1, 0.05, 0.02, 0.01], np.linspace(0.0, 1.0, 33))
    assert all(a > b for a, b in zip(profile.values, profile.values[1:]))
    assert profile.values[-1] < 0.2 * profile.values[0]


def test_disc_extension_of_rotation():
    theta = 0.15
    D = extension.disc_extension(corpus.rotation_map(theta))
    w = np.array([0.3 + 0.2j, -0.5j, 0.0])
    assert np.allclose(D(w), w * np.exp(2j * math.pi * theta), atol=1e-12)
    assert D(0.0) == 0
    with pytest.raises(DomainError):
        D(1.5)
    with pytest.raises(DomainError):
        extension.disc_extension(corpus.power_map(2.0))


def test_extension_beltrami_is_symmetric(small_lattice):
    H = extension.ba_extend(corpus.power_map(1.5))
    mu = extension.extension_beltrami(H)
    z = small_lattice.points()[::7]
    assert mu.symmetry == "symmetric"
    assert np.allclose(mu.upper(z), extension.beltrami_of(H, z).mu)
    assert mu.symmetry_defect(z) == 0.0


def quadratic_field():
    return VectorField.closed_form(lambda u: np.asarray(u) ** 2, chart=Chart.LINE,
                                   antiderivative=lambda u: np.asarray(u) ** 3 / 3.0, name="u^2")


def test_field_extension_of_quadratic():
    z = np.array([0.3 + 0.2j, -1.5 + 1.0j, 2.0 + 0.1j])
    doubled = extension.ba_extend_field(quadratic_field())
    assert np.allclose(doubled(z), z.real ** 2 + z.imag ** 2 / 3 + 2j * z.real * z.imag, rtol=1e-12)
    assert np.allclose(doubled.dbar(z), 4j * z.imag / 3, rtol=1e-9, atol=1e-12)
    single = extension.ba_extend_field(quadratic_field(), doubled=False)
    assert np.allclose(single.dbar(z), 0.5 * (z.real + 5j * z.imag / 3), rtol=1e-9, atol=1e-12)


def test_field_extension_dbar_matches_differences():
    ext = extension.ba_extend_field(corpus.sin_line_field(2.0))
    z = np.array([0.4 + 0.3j, -1.0 + 0.8j, 2.5 + 1.2j])
    d = 1e-5
    numeric = 0.5 * ((ext(z + d) - ext(z - d)) + 1j * (ext(z + 1j * d) - ext(z - 1j * d))) / (2 * d)
    assert np.allclose(ext.dbar(z), numeric, atol=1e-7)


def test_field_extension_needs_line_chart(weierstrass):
    with pytest.raises(DomainError):
        extension.ba_extend_field(weierstrass)
    with pytest.raises(DomainError):
        extension.ba_extend_field(corpus.sin_line_field(1.0))(np.array([1.0 + 0j]))
