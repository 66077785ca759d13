"""Models for tangent vector fields on the circle and the line"""

import math
from enum import Enum
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from app.models.grids import primitive_by_quadrature


class Chart(str, Enum):
    """Coordinate chart a field is expressed in"""
    ANGLE = "angle"      # V(x), x an angle, real valued
    CIRCLE = "circle"    # Ṽ(z), z on the unit circle, complex valued
    LINE = "line"        # V̂(u), u real, real valued


class FieldKind(str, Enum):
    """How a field is represented"""
    SAMPLED = "sampled"
    TRIG = "trig"
    CLOSED_FORM = "closed-form"


class VectorField(BaseModel):
    """
    Tangent vector field in one of three charts.

    Trigonometric fields carry real coefficients of V(x) = a0 + sum a_k cos kx + b_k sin kx.
    Sampled fields carry values on the equispaced angle grid 2πj/N and are evaluated by
    trigonometric interpolation. Closed-form fields carry an evaluator and, optionally,
    an antiderivative vanishing at 0.
    """
    model_config = ConfigDict(use_enum_values=True, frozen=True)

    name: str = Field(default="field", description="Identifier used in reports")
    kind: FieldKind = Field(description="Representation tag")
    chart: Chart = Field(default=Chart.ANGLE, description="Chart the evaluator works in")
    a0: float = Field(default=0.0, description="Constant coefficient")
    a: List[float] = Field(default_factory=list, description="Cosine coefficients a_1..a_n")
    b: List[float] = Field(default_factory=list, description="Sine coefficients b_1..b_n")
    samples: List[float] = Field(default_factory=list, description="Values at 2πj/N, j = 0..N-1")
    growth: Optional[str] = Field(default=None, description="Growth at infinity (line chart metadata)")
    func: Optional[Callable] = Field(default=None, exclude=True, description="Closed-form evaluator")
    antiderivative: Optional[Callable] = Field(
        default=None,
        exclude=True,
        description="Closed-form primitive P with P(0) = 0"
    )

    _trig: Optional["VectorField"] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_representation(self) -> "VectorField":
        if self.kind == FieldKind.TRIG.value:
            if len(self.a) != len(self.b):
                raise ValueError("trigonometric fields need as many sine as cosine coefficients")
            if self.chart != Chart.ANGLE.value:
                raise ValueError("trigonometric fields live in the angle chart")
        elif self.kind == FieldKind.SAMPLED.value:
            if len(self.samples) < 2:
                raise ValueError("sampled fields need at least two samples")
        elif self.func is None:
            raise ValueError("closed-form fields need an evaluator")
        return self

    @classmethod
    def trig(cls, a0: float = 0.0, a: Optional[List[float]] = None, b: Optional[List[float]] = None,
             name: str = "trig") -> "VectorField":
        a = list(a or [])
        b = list(b or [])
        n = max(len(a), len(b))
        a = a + [0.0] * (n - len(a))
        b = b + [0.0] * (n - len(b))
        return cls(name=name, kind=FieldKind.TRIG, a0=float(a0), a=[float(v) for v in a], b=[float(v) for v in b])

    @classmethod
    def closed_form(cls, func: Callable, chart: Chart = Chart.ANGLE, antiderivative: Optional[Callable] = None,
                    name: str = "closed-form", growth: Optional[str] = None) -> "VectorField":
        return cls(name=name, kind=FieldKind.CLOSED_FORM, chart=chart, func=func,
                   antiderivative=antiderivative, growth=growth)

    @classmethod
    def sampled(cls, values, name: str = "sampled") -> "VectorField":
        return cls(name=name, kind=FieldKind.SAMPLED, samples=[float(v) for v in values])

    @property
    def degree(self) -> int:
        """Highest nonzero harmonic of a trigonometric field."""
        trig = self.to_trig()
        for k in range(len(trig.a), 0, -1):
            if trig.a[k - 1] != 0.0 or trig.b[k - 1] != 0.0:
                return k
        return 0

    def sample_grid(self) -> np.ndarray:
        n = len(self.samples)
        return 2.0 * math.pi * np.arange(n) / n

    def to_trig(self) -> "VectorField":
        """Trigonometric form; sampled fields are interpolated through the real FFT."""
        if self.kind == FieldKind.TRIG.value:
            return self
        if self.kind != FieldKind.SAMPLED.value:
            raise TypeError(f"field {self.name} has no trigonometric form")
        if self._trig is None:
            values = np.asarray(self.samples)
            n = values.size
            coeffs = np.fft.rfft(values) / n
            a = 2.0 * coeffs.real[1:]
            b = -2.0 * coeffs.imag[1:]
            if n % 2 == 0:
                # Nyquist harmonic is shared between +N/2 and -N/2
                a[-1] *= 0.5
                b[-1] = 0.0
            self._trig = VectorField.trig(float(coeffs.real[0]), a.tolist(), b.tolist(), name=self.name)
        return self._trig

    def __call__(self, x):
        if self.kind == FieldKind.CLOSED_FORM.value:
            return self.func(x)
        trig = self.to_trig()
        return evaluate_trig(trig.a0, trig.a, trig.b, x)

    def derivative(self) -> "VectorField":
        trig = self.to_trig()
        k = np.arange(1, len(trig.a) + 1)
        return VectorField.trig(0.0, (k * np.asarray(trig.b)).tolist(), (-k * np.asarray(trig.a)).tolist(),
                                name=f"d/dx {self.name}")

    def primitive(self) -> Callable:
        """Antiderivative vanishing at 0: exact for trigonometric fields and declared primitives, quadrature otherwise."""
        if self.antiderivative is not None:
            return self.antiderivative
        if self.kind == FieldKind.CLOSED_FORM.value:
            func = self.func
            return lambda x: primitive_by_quadrature(func, x)
        trig = self.to_trig()
        k = np.arange(1, len(trig.a) + 1, dtype=float)
        a = np.asarray(trig.a)
        b = np.asarray(trig.b)
        shift = float(np.sum(b / k)) if k.size else 0.0

        def primitive(x):
            x = np.asarray(x, dtype=float)
            value = trig.a0 * x + shift
            for kk, ak, bk in zip(k, a, b):
                if ak != 0.0 or bk != 0.0:
                    value = value + (ak * np.sin(kk * x) - bk * np.cos(kk * x)) / kk
            return value

        return primitive

    def scaled(self, factor: float) -> "VectorField":
        if self.kind == FieldKind.CLOSED_FORM.value:
            func = self.func
            anti = self.antiderivative
            return VectorField.closed_form(
                lambda x: factor * func(x), chart=self.chart, name=f"{factor:g}*{self.name}",
                antiderivative=(lambda x: factor * anti(x)) if anti is not None else None,
                growth=self.growth
            )
        trig = self.to_trig()
        return VectorField.trig(factor * trig.a0, [factor * v for v in trig.a], [factor * v for v in trig.b],
                                name=f"{factor:g}*{self.name}")

    def plus(self, other: "VectorField") -> "VectorField":
        if self.kind != FieldKind.CLOSED_FORM.value and other.kind != FieldKind.CLOSED_FORM.value:
            s, o = self.to_trig(), other.to_trig()
            n = max(len(s.a), len(o.a))
            pad = lambda v: list(v) + [0.0] * (n - len(v))
            a = (np.asarray(pad(s.a)) + np.asarray(pad(o.a))).tolist()
            b = (np.asarray(pad(s.b)) + np.asarray(pad(o.b))).tolist()
            return VectorField.trig(s.a0 + o.a0, a, b, name=f"{self.name}+{other.name}")
        if self.chart != other.chart:
            raise ValueError("fields in different charts cannot be added")
        p, q = self.primitive(), other.primitive()
        return VectorField.closed_form(
            lambda x: self(x) + other(x), chart=self.chart, name=f"{self.name}+{other.name}",
            antiderivative=(lambda x: p(x) + q(x)) if p is not None and q is not None else None
        )


def evaluate_trig(a0: float, a: List[float], b: List[float], x):
    """Evaluate a0 + sum a_k cos kx + b_k sin kx using only the nonzero harmonics."""
    x = np.asarray(x, dtype=float)
    value = np.full_like(x, a0, dtype=float)
    for k, (ak, bk) in enumerate(zip(a, b), start=1):
        if ak != 0.0:
            value = value + ak * np.cos(k * x)
        if bk != 0.0:
            value = value + bk * np.sin(k * x)
    if value.ndim == 0:
        return float(value)
    return value


class QuadraticPolyField(BaseModel):
    """Möbius vector field (αz² + βz + γ) d/dz in the circle chart"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    alpha: complex = Field(description="Coefficient of z²")
    beta: complex = Field(description="Coefficient of z, purely imaginary on the circle")
    gamma: complex = Field(description="Constant coefficient, -conj(alpha) on the circle")

    @field_validator("alpha", "beta", "gamma", mode="before")
    @classmethod
    def _as_complex(cls, v):
        return complex(v)

    @model_validator(mode="after")
    def _check_reality(self) -> "QuadraticPolyField":
        scale = max(1.0, abs(self.alpha), abs(self.beta))
        if abs(self.beta.real) > 1e-12 * scale:
            raise ValueError("beta must be purely imaginary for a field tangent to the circle")
        if abs(self.gamma + self.alpha.conjugate()) > 1e-12 * scale:
            raise ValueError("gamma must equal -conj(alpha) for a field tangent to the circle")
        return self

    @classmethod
    def from_real(cls, p: float, q: float, r: float) -> "QuadraticPolyField":
        """Field with alpha = p + iq and beta = ir."""
        alpha = complex(p, q)
        return cls(alpha=alpha, beta=complex(0.0, r), gamma=-alpha.conjugate())

    def coefficients(self) -> Dict[int, complex]:
        return {0: self.gamma, 1: self.beta, 2: self.alpha}

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return self.alpha * z * z + self.beta * z + self.gamma

    def angle_values(self, x) -> np.ndarray:
        """W(e^{ix}) / (i e^{ix}), real for fields tangent to the circle."""
        z = np.exp(1j * np.asarray(x, dtype=float))
        return self(z) / (1j * z)

    def as_field(self) -> VectorField:
        """Angle-chart field of the same Möbius vector field."""
        return VectorField.trig(
            self.beta.imag,
            [2.0 * self.alpha.imag],
            [2.0 * self.alpha.real],
            name="mobius"
        )


class Quadruple(BaseModel):
    """Four points in increasing line order or counter-clockwise circle order"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    a: complex = Field(description="First point; -inf allowed on the line")
    b: complex = Field(description="Second point")
    c: complex = Field(description="Third point")
    d: complex = Field(description="Fourth point")

    @field_validator("a", "b", "c", "d", mode="before")
    @classmethod
    def _as_complex(cls, v):
        if isinstance(v, (int, float)) and math.isinf(v):
            return complex(v, 0.0)
        return complex(v)

    @model_validator(mode="after")
    def _check_order(self) -> "Quadruple":
        points = [self.a, self.b, self.c, self.d]
        if all(p.imag == 0 for p in points):
            reals = [p.real for p in points]
            if not all(x < y for x, y in zip(reals, reals[1:])):
                raise ValueError(f"line quadruple must be strictly increasing, got {reals}")
        else:
            angles = np.unwrap(np.angle(points))
            if not all(x < y for x, y in zip(angles, angles[1:])) or angles[-1] - angles[0] >= 2 * math.pi:
                raise ValueError("circle quadruple must be in counter-clockwise order")
        return self

    @classmethod
    def normalized(cls, x: float, t: float) -> "Quadruple":
        """The quadruple (-inf, x-t, x, x+t) with cross ratio -1."""
        return cls(a=-math.inf, b=x - t, c=x, d=x + t)

    @property
    def on_line(self) -> bool:
        return all(p.imag == 0 for p in (self.a, self.b, self.c, self.d))

    @property
    def at_infinity(self) -> bool:
        return math.isinf(self.a.real)

    def points(self) -> List[complex]:
        return [self.a, self.b, self.c, self.d]


class ScaleProfile(BaseModel):
    """Per-scale supremum of a difference functional"""
    scales: List[float] = Field(description="Strictly decreasing scales")
    values: List[float] = Field(description="Supremum at each scale")

    @model_validator(mode="after")
    def _check(self) -> "ScaleProfile":
        if len(self.scales) != len(self.values):
            raise ValueError("scales and values differ in length")
        if not all(s > t for s, t in zip(self.scales, self.scales[1:])):
            raise ValueError("scales must be strictly decreasing")
        return self

    def tail(self, count: int = 3) -> List[float]:
        return self.values[-count:]

    def rows(self) -> List[List[float]]:
        return [[s, v] for s, v in zip(self.scales, self.values)]


class FieldExtension(BaseModel):
    """Averaging extension Ṽ = F + iG of a line field together with its exact ∂̄-derivative"""
    model_config = ConfigDict(frozen=True)

    field: VectorField = Field(description="Boundary field in the line chart")
    doubled: bool = Field(default=True, description="Doubled imaginary part")
    evaluator: Callable = Field(exclude=True, description="Ṽ on the upper half-plane")
    dbar: Callable = Field(exclude=True, description="∂̄Ṽ on the upper half-plane")

    def __call__(self, z):
        return self.evaluator(np.asarray(z, dtype=complex))


class FieldSamples(BaseModel):
    """Values of a transformed field at explicit nodes"""
    name: str = Field(default="samples", description="Identifier used in reports")
    chart: Chart = Field(default=Chart.ANGLE, description="Chart of the nodes")
    x: List[float] = Field(description="Sample nodes")
    values: List[float] = Field(description="Field values at the nodes")
    error: float = Field(default=0.0, description="Largest per-node error estimate")
    converged: bool = Field(default=True, description="Whether every per-node quadrature met its tolerance")

    model_config = ConfigDict(use_enum_values=True)

    @model_validator(mode="after")
    def _check(self) -> "FieldSamples":
        if len(self.x) != len(self.values):
            raise ValueError("nodes and values differ in length")
        return self

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def rows(self) -> List[List[float]]:
        return [[x, v] for x, v in zip(self.x, self.values)]
