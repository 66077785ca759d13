import math

import numpy as np
import pytest

from app.errors import ConfigError, DomainError
from app.services import corpus
from app.storage.tables import write_map_table


def _central(f, x, step=1e-5):
    return (f(x + step) - f(x - step)) / (2 * step)


def test_line_maps_are_normalised(line_maps):
    for h in line_maps:
        if h.name.startswith("affine"):
            continue
        assert h(0.0) == pytest.approx(0.0, abs=1e-15)
        assert h(1.0) == pytest.approx(1.0)


def test_closed_forms_carry_consistent_inverse_and_primitive(line_maps):
    x = np.linspace(-3.0, 3.0, 41)
    x = x[np.abs(x) > 1e-3]
    for h in line_maps + [corpus.power_map(2.0, 0.5), corpus.rotation_map(0.25)]:
        np.testing.assert_allclose(h.inverse_func(h(x)), x, rtol=1e-10, atol=1e-12, err_msg=h.name)
        np.testing.assert_allclose(_central(h.antiderivative, x), h(x), rtol=1e-6, atol=1e-8, err_msg=h.name)
        assert h.antiderivative(0.0) == pytest.approx(0.0, abs=1e-15)


def test_circle_lifts_commute_with_translation(circle_maps):
    x = np.linspace(-2.0, 2.0, 37)
    for h in circle_maps:
        assert h.is_circle
        np.testing.assert_allclose(h(x + 1.0), h(x) + 1.0, rtol=0, atol=1e-12, err_msg=h.name)
        np.testing.assert_allclose(_central(h.antiderivative, x), h(x), rtol=1e-6, atol=1e-8, err_msg=h.name)


def test_constructor_preconditions():
    with pytest.raises(DomainError, match="slope"):
        corpus.affine_map(0.0)
    with pytest.raises(DomainError, match="slope ratio"):
        corpus.piecewise_linear_map(-1.0)
    with pytest.raises(DomainError, match="diffeomorphism"):
        corpus.circle_smooth_map(1.0)
    with pytest.raises(DomainError, match="exponent"):
        corpus.power_map(0.0)
    with pytest.raises(DomainError, match="frequency"):
        corpus.sin_line_field(0.0)
    with pytest.raises(DomainError, match="term"):
        corpus.weierstrass_field(0)


def test_cubic_circle_map_is_flat_at_zero():
    h = corpus.circle_cubic_map()
    # x - sin(2πx)/2π = (2π)² x³/6 + O(x⁵)
    assert h(1e-3) == pytest.approx((2 * math.pi) ** 2 * 1e-9 / 6, rel=1e-4)


def test_weierstrass_coefficients():
    V = corpus.weierstrass_field(5)
    assert len(V.a) == 16
    assert {k: v for k, v in enumerate(V.a) if v} == {0: 1.0, 1: 0.5, 3: 0.25, 7: 0.125, 15: 0.0625}
    assert V(0.0) == pytest.approx(2.0 - 2.0 ** -4)


def test_line_fields():
    u = np.linspace(-5.0, 5.0, 51)
    V = corpus.rational_line_field()
    assert V.chart == "line"
    np.testing.assert_allclose(V(np.array([0.0, 1.0])), [0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(_central(V.antiderivative, u), V(u), rtol=1e-6, atol=1e-8)
    assert V(1e8) == pytest.approx(-1.0, rel=1e-6)

    S = corpus.sin_line_field(3.0)
    np.testing.assert_allclose(_central(S.antiderivative, u), S(u), rtol=1e-6, atol=1e-8)
    assert S.name == "sin-line(3)"


def test_radial_bump_support_and_mass():
    mu = corpus.radial_bump(0.5 + 2.0j, 1.0, 0.5j)
    assert mu.sup_bound == 0.5
    assert mu.upper(np.array([0.5 + 2.0j]))[0] == pytest.approx(0.5j)
    assert mu.upper(np.array([2.0 + 2.0j, 0.5 + 0.9j]))[0] == 0
    assert mu.lower(np.array([0.5 - 2.0j]))[0] == 0

    # midpoint sum over the bounding square
    h = 1.0 / 500
    s = np.arange(-1.0 + h / 2, 1.0, h)
    X, Y = np.meshgrid(s, s)
    total = np.sum(mu.upper((0.5 + X) + 1j * (2.0 + Y))) * h * h
    assert total == pytest.approx(corpus.bump_mass(1.0, 0.5j), rel=1e-4)

    with pytest.raises(DomainError, match="upper half-plane"):
        corpus.radial_bump(0.5j, 1.0, 0.1)


def test_random_coefficient_is_seeded():
    z = np.array([0.3 + 0.2j, -1.0 + 2.0j, 4.0 + 0.01j])
    first = corpus.random_coefficient(11)
    again = corpus.random_coefficient(11)
    other = corpus.random_coefficient(12)

    np.testing.assert_array_equal(first.upper(z), again.upper(z))
    np.testing.assert_array_equal(first.lower(np.conj(z)), again.lower(np.conj(z)))
    assert not np.allclose(first.upper(z), other.upper(z))
    assert first.sampled_sup(np.concatenate([z, np.conj(z)])) <= 0.9


def test_build_map_dispatch():
    pl = corpus.build_map({"kind": "piecewise-linear", "K": 2})
    assert pl.name == "pl(2)"
    assert pl(-1.0) == -2.0

    named = corpus.build_map({"kind": "power", "alpha": 2.0, "id": "square"})
    assert named.name == "square"
    assert named(3.0) == pytest.approx(9.0)

    conj = corpus.build_map({"kind": "linear-conjugacy", "lambda0": 2.0, "lambda1": 4.0})
    assert conj(3.0) == pytest.approx(9.0)


@pytest.mark.parametrize("spec, message", [
    ({"kind": "spiral"}, "unknown map kind"),
    ({}, "unknown map kind"),
    ({"kind": "affine", "slope": 2}, "bad parameters"),
    ({"kind": "table"}, "path"),
])
def test_build_map_rejects_bad_tables(spec, message):
    with pytest.raises(ConfigError, match=message):
        corpus.build_map(spec)


def test_build_map_reads_tables(tmp_path):
    path = write_map_table(tmp_path / "smooth.csv", corpus.circle_smooth_map(0.3))

    h = corpus.build_map({"kind": "table", "path": str(path)})
    assert h.name == "smooth"
    assert h.is_circle
    assert h(0.25) == pytest.approx(corpus.circle_smooth_map(0.3)(0.25), abs=1e-6)

    renamed = corpus.build_map({"kind": "table", "path": str(path), "id": "tabulated"})
    assert renamed.name == "tabulated"


def test_build_field_dispatch():
    W = corpus.build_field({"kind": "weierstrass", "terms": 3, "id": "w3"})
    assert W.name == "w3"
    assert len(W.a) == 4

    T = corpus.build_field({"kind": "trig", "a": [0.0, 1.0], "b": [2.0]})
    assert T(0.0) == pytest.approx(1.0)

    with pytest.raises(ConfigError, match="unknown field kind"):
        corpus.build_field({"kind": "vortex"})
    with pytest.raises(ConfigError, match="bad parameters"):
        corpus.build_field({"kind": "sin-line", "omega": 2})
