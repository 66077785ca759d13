"""Corpus Service - named boundary maps, vector fields and coefficients used by tests and the CLI"""

import logging
import math
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from app.errors import ConfigError, DomainError
from app.models.differentials import TwoSidedBeltrami
from app.models.fields import Chart, VectorField
from app.models.maps import Lift, LineMap
from app.services import circlemap
from app.storage.tables import read_map_table

logger = logging.getLogger(__name__)

MODULE = "corpus"

TWO_PI = 2.0 * math.pi


def identity_map() -> LineMap:
    return circlemap.power_map(1.0, name="identity")


def affine_map(a: float, b: float = 0.0) -> LineMap:
    """x -> ax + b for a > 0."""
    if a <= 0:
        raise DomainError(f"affine slope must be positive, got {a}", module=MODULE)
    return LineMap.closed_form(
        lambda x: a * np.asarray(x) + b,
        name=f"affine({a:g},{b:g})",
        inverse=lambda y: (np.asarray(y) - b) / a,
        antiderivative=lambda x: 0.5 * a * np.asarray(x) ** 2 + b * np.asarray(x),
        params={"a": a, "b": b}
    )


def power_map(alpha: float, c: float = 0.0) -> LineMap:
    """sign(x)|x|^α + c with exact inverse and antiderivative."""
    base = circlemap.power_map(alpha)
    if c == 0.0:
        return base
    f, g, P = base.func, base.inverse_func, base.antiderivative
    return LineMap.closed_form(
        lambda x: f(x) + c,
        name=f"power({alpha:g})+{c:g}",
        inverse=lambda y: g(np.asarray(y) - c),
        antiderivative=lambda x: P(x) + c * np.asarray(x),
        params={"alpha": alpha, "c": c}
    )


def piecewise_linear_map(K: float) -> LineMap:
    """x on [0, ∞), Kx on (-∞, 0); fixes 0, 1 and ∞."""
    if K <= 0:
        raise DomainError(f"slope ratio must be positive, got {K}", module=MODULE)
    return LineMap.closed_form(
        lambda x: np.where(np.asarray(x) >= 0, x, K * np.asarray(x)) + 0.0,
        name=f"pl({K:g})",
        inverse=lambda y: np.where(np.asarray(y) >= 0, y, np.asarray(y) / K) + 0.0,
        antiderivative=lambda x: 0.5 * np.where(np.asarray(x) >= 0, 1.0, K) * np.asarray(x) ** 2,
        params={"K": K}
    )


def _sine_lift(a: float, name: str) -> LineMap:
    """Lift x + a sin(2πx)/2π of a circle map."""
    return LineMap.closed_form(
        lambda x: np.asarray(x) + a * np.sin(TWO_PI * np.asarray(x)) / TWO_PI,
        name=name,
        lift=Lift.CIRCLE,
        antiderivative=lambda x: 0.5 * np.asarray(x) ** 2 - a * (np.cos(TWO_PI * np.asarray(x)) - 1.0) / TWO_PI ** 2,
        params={"a": a}
    )


def circle_smooth_map(a: float) -> LineMap:
    """Diffeomorphic circle map with lift x + a sin(2πx)/2π, |a| < 1."""
    if abs(a) >= 1:
        raise DomainError(f"|a| must be below 1 for a diffeomorphism, got {a}", module=MODULE)
    return _sine_lift(a, f"circle-smooth({a:g})")


def circle_cubic_map() -> LineMap:
    """Lift x - sin(2πx)/2π, with a cubic critical point at 0."""
    return _sine_lift(-1.0, "circle-cubic")


def rotation_map(theta: float) -> LineMap:
    """Rigid rotation by θ turns, lift x + θ."""
    return LineMap.closed_form(
        lambda x: np.asarray(x) + theta,
        name=f"rotation({theta:g})",
        lift=Lift.CIRCLE,
        inverse=lambda y: np.asarray(y) - theta,
        antiderivative=lambda x: 0.5 * np.asarray(x) ** 2 + theta * np.asarray(x),
        params={"theta": theta}
    )


def weierstrass_field(terms: int = 12) -> VectorField:
    """Σ_{k<terms} 2^{-k} cos(2^k x): in the Zygmund class, not in the little Zygmund class."""
    if terms < 1:
        raise DomainError(f"need at least one term, got {terms}", module=MODULE)
    a = np.zeros(2 ** (terms - 1))
    for k in range(terms):
        a[2 ** k - 1] = 2.0 ** (-k)
    return VectorField.trig(0.0, a.tolist(), [0.0] * a.size, name=f"weierstrass({terms})")


def trig_field(a0: float = 0.0, a: Optional[Sequence[float]] = None, b: Optional[Sequence[float]] = None,
               name: str = "trig") -> VectorField:
    return VectorField.trig(a0, list(a or []), list(b or []), name=name)


def rational_line_field() -> VectorField:
    """x(1-x)/(1+x²) on the line; vanishes at 0 and 1 and tends to -1 at infinity."""
    return VectorField.closed_form(
        lambda u: np.asarray(u) * (1.0 - np.asarray(u)) / (1.0 + np.asarray(u) ** 2),
        chart=Chart.LINE,
        antiderivative=lambda u: -np.asarray(u) + np.arctan(u) + 0.5 * np.log1p(np.asarray(u) ** 2),
        name="rational-line",
        growth="O(1)"
    )


def abs_sin_field() -> VectorField:
    """|sin x|: Lipschitz, hence Zygmund, with a corner at every multiple of π."""
    return VectorField.closed_form(lambda x: np.abs(np.sin(x)), chart=Chart.ANGLE, name="abs-sin")


def sin_line_field(k: float = 1.0) -> VectorField:
    """sin(ku) on the line with primitive (1 - cos ku)/k."""
    if k == 0:
        raise DomainError("frequency must be nonzero", module=MODULE)
    return VectorField.closed_form(
        lambda u: np.sin(k * np.asarray(u)),
        chart=Chart.LINE,
        antiderivative=lambda u: (1.0 - np.cos(k * np.asarray(u))) / k,
        name=f"sin-line({k:g})",
        growth="O(1)"
    )


def radial_bump(center: complex, radius: float, amplitude: complex, power: int = 4) -> TwoSidedBeltrami:
    """
    c(1 - |ζ-a|²/r²)^m inside the disc |ζ-a| < r of the upper half-plane, zero elsewhere
    and on the lower half-plane.
    """
    center = complex(center)
    if radius <= 0 or center.imag <= radius:
        raise DomainError(f"bump disc must lie in the upper half-plane (a = {center}, r = {radius})", module=MODULE)

    def upper(z):
        s = np.abs(np.asarray(z, dtype=complex) - center) ** 2 / radius ** 2
        return amplitude * np.where(s < 1.0, np.clip(1.0 - s, 0.0, None) ** power, 0.0)

    return TwoSidedBeltrami.zero_below(upper, name=f"bump({center:g},{radius:g})", sup_bound=abs(amplitude))


def bump_mass(radius: float, amplitude: complex, power: int = 4) -> complex:
    """∫∫ of radial_bump: c π r² / (m + 1)."""
    return amplitude * math.pi * radius ** 2 / (power + 1)


def random_coefficient(seed: int, terms: int = 4, scale: float = 0.9) -> TwoSidedBeltrami:
    """Smooth ad hoc two-sided coefficient with |μ| <= scale, reproducible from the seed."""
    rng = np.random.default_rng(seed)
    freq = rng.uniform(-3.0, 3.0, size=(2, terms))
    phase = rng.uniform(0.0, 2.0 * math.pi, size=(2, terms))
    weight = rng.dirichlet(np.ones(terms), size=2) * scale

    def half(index: int) -> Callable:
        def evaluate(z):
            z = np.asarray(z, dtype=complex)
            value = np.zeros(z.shape, dtype=complex)
            for f, p, w in zip(freq[index], phase[index], weight[index]):
                value = value + w * np.exp(1j * (f * z.real + p)) / (1.0 + np.abs(z.imag))
            return value
        return evaluate

    return TwoSidedBeltrami(name=f"random({seed})", upper=half(0), lower=half(1), sup_bound=scale)


MAP_BUILDERS: Dict[str, Callable[..., LineMap]] = {
    "identity": identity_map,
    "affine": affine_map,
    "power": power_map,
    "piecewise-linear": piecewise_linear_map,
    "circle-smooth": circle_smooth_map,
    "circle-cubic": circle_cubic_map,
    "rotation": rotation_map,
    "linear-conjugacy": circlemap.linear_conjugacy,
}

FIELD_BUILDERS: Dict[str, Callable[..., VectorField]] = {
    "weierstrass": weierstrass_field,
    "trig": trig_field,
    "rational-line": rational_line_field,
    "abs-sin": abs_sin_field,
    "sin-line": sin_line_field,
}


def _dispatch(spec: Dict[str, Any], builders: Dict[str, Callable], label: str) -> Tuple[Any, str]:
    spec = dict(spec)
    kind = spec.pop("kind", None)
    name = spec.pop("id", None) or spec.pop("name", None)
    if kind not in builders:
        raise ConfigError(f"unknown {label} kind {kind!r}; expected one of {sorted(builders)}", module=MODULE)
    try:
        built = builders[kind](**spec)
    except TypeError as e:
        raise ConfigError(f"bad parameters for {label} {kind!r}: {e}", module=MODULE)
    return built, name


def build_map(spec: Dict[str, Any]) -> LineMap:
    """
    Map from a configuration table such as {"kind": "piecewise-linear", "K": 2}.

    Tables are read with {"kind": "table", "path": ...}.
    """
    if spec.get("kind") == "table":
        if "path" not in spec:
            raise ConfigError("table maps need a path", module=MODULE)
        h = read_map_table(spec["path"])
        name = spec.get("id")
        return h.model_copy(update={"name": name}) if name else h
    h, name = _dispatch(spec, MAP_BUILDERS, "map")
    logger.debug(f"Built map {name or h.name}")
    return h.model_copy(update={"name": name}) if name else h


def build_field(spec: Dict[str, Any]) -> VectorField:
    """Field from a configuration table such as {"kind": "weierstrass", "terms": 10}."""
    V, name = _dispatch(spec, FIELD_BUILDERS, "field")
    return V.model_copy(update={"name": name}) if name else V
