"""Models for boundary homeomorphisms, their extensions and dilatation fields"""

import logging
import math
from enum import Enum
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator
from scipy.interpolate import PchipInterpolator

from app.errors import DomainError, InvariantViolation
from app.models.grids import primitive_by_quadrature

logger = logging.getLogger(__name__)


class MapKind(str, Enum):
    """Representation tag of a boundary map"""
    CLOSED_FORM = "closed-form"
    SAMPLED = "sampled"


class Lift(str, Enum):
    """Whether a map is the periodic lift of a circle map or a map of the line"""
    CIRCLE = "circle"
    LINE = "line"


class LineMap(BaseModel):
    """
    Increasing homeomorphism of the real line.

    Circle maps are stored through their lifts, h(x + 1) = h(x) + 1. Sampled maps keep
    a strictly increasing table (one period for circle lifts, endpoints included) and are
    evaluated by monotone cubic interpolation.
    """
    model_config = ConfigDict(use_enum_values=True, frozen=True)

    name: str = Field(default="map", description="Identifier used in reports")
    kind: MapKind = Field(description="Representation tag")
    lift: Lift = Field(default=Lift.LINE, description="Lift convention")
    table_x: List[float] = Field(default_factory=list, description="Sample abscissae, strictly increasing")
    table_h: List[float] = Field(default_factory=list, description="Sample values, strictly increasing")
    qs_constant: Optional[float] = Field(default=None, ge=1.0, description="Cached quasisymmetry constant")
    params: Dict[str, float] = Field(default_factory=dict, description="Constructor parameters for reports")
    func: Optional[Callable] = Field(default=None, exclude=True, description="Closed-form evaluator")
    inverse_func: Optional[Callable] = Field(default=None, exclude=True, description="Closed-form inverse")
    antiderivative: Optional[Callable] = Field(
        default=None,
        exclude=True,
        description="Closed-form primitive P with P(0) = 0"
    )

    _interp: Optional[PchipInterpolator] = PrivateAttr(default=None)
    _primitive: Optional[PchipInterpolator] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_table(self) -> "LineMap":
        if self.kind == MapKind.CLOSED_FORM.value:
            if self.func is None:
                raise ValueError("closed-form maps need an evaluator")
            return self
        xs = np.asarray(self.table_x, dtype=float)
        hs = np.asarray(self.table_h, dtype=float)
        if xs.size < 2 or xs.size != hs.size:
            raise ValueError("sampled maps need matching tables of at least two rows")
        if np.any(np.diff(xs) <= 0):
            raise InvariantViolation("sample abscissae are not strictly increasing", module="circlemap")
        if np.any(np.diff(hs) <= 0):
            bad = int(np.argmax(np.diff(hs) <= 0))
            raise InvariantViolation(
                f"map table is not strictly increasing at x = {xs[bad]:.6g}",
                module="circlemap"
            )
        if self.lift == Lift.CIRCLE.value:
            if not math.isclose(xs[-1] - xs[0], 1.0, abs_tol=1e-12):
                raise ValueError("circle lift tables must span exactly one period")
            if not math.isclose(hs[-1] - hs[0], 1.0, abs_tol=1e-12):
                raise InvariantViolation("circle lift table violates h(x + 1) = h(x) + 1", module="circlemap")
        return self

    @classmethod
    def closed_form(cls, func: Callable, name: str = "map", lift: Lift = Lift.LINE,
                    inverse: Optional[Callable] = None, antiderivative: Optional[Callable] = None,
                    params: Optional[Dict[str, float]] = None) -> "LineMap":
        return cls(name=name, kind=MapKind.CLOSED_FORM, lift=lift, func=func, inverse_func=inverse,
                   antiderivative=antiderivative, params=params or {})

    @classmethod
    def from_table(cls, xs, hs, name: str = "sampled", lift: Lift = Lift.LINE) -> "LineMap":
        return cls(name=name, kind=MapKind.SAMPLED, lift=lift,
                   table_x=[float(v) for v in xs], table_h=[float(v) for v in hs])

    @property
    def is_circle(self) -> bool:
        return self.lift == Lift.CIRCLE.value

    def _interpolant(self) -> PchipInterpolator:
        if self._interp is None:
            self._interp = PchipInterpolator(np.asarray(self.table_x), np.asarray(self.table_h), extrapolate=False)
        return self._interp

    def _reduce(self, x: np.ndarray):
        """Split x = n + r with r in the tabulated period."""
        x0 = self.table_x[0]
        n = np.floor(x - x0)
        return n, x - n

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == MapKind.CLOSED_FORM.value:
            value = self.func(x)
        elif self.is_circle:
            n, r = self._reduce(x)
            value = self._interpolant()(r) + n
        else:
            if np.any(x < self.table_x[0]) or np.any(x > self.table_x[-1]):
                raise DomainError(
                    f"map {self.name} is tabulated on [{self.table_x[0]}, {self.table_x[-1]}] only",
                    module="circlemap"
                )
            value = self._interpolant()(x)
        if np.ndim(value) == 0:
            return float(value)
        return value

    def primitive(self, x):
        """
        Antiderivative P(x) = ∫_0^x h, exact for closed forms that carry one and for tables.

        Args:
            x: Evaluation point(s)

        Returns:
            P(x), broadcast over x
        """
        x = np.asarray(x, dtype=float)
        if self.antiderivative is not None:
            return self.antiderivative(x)
        if self.kind == MapKind.CLOSED_FORM.value:
            return primitive_by_quadrature(self.func, x)
        if self._primitive is None:
            self._primitive = self._interpolant().antiderivative()
        prim = self._primitive
        if self.is_circle:
            x0 = self.table_x[0]
            period = float(prim(x0 + 1.0) - prim(x0))

            def from_start(v):
                # ∫_{x0}^{v} h over whole periods plus the remainder
                n, r = self._reduce(v)
                return prim(r) - prim(x0) + n * (r - x0 + period) + 0.5 * n * (n - 1)

            value = from_start(x) - from_start(np.asarray(0.0))
            return float(value) if np.ndim(value) == 0 else value
        if np.any(x < self.table_x[0]) or np.any(x > self.table_x[-1]):
            raise DomainError(f"map {self.name} is tabulated on [{self.table_x[0]}, {self.table_x[-1]}] only",
                              module="circlemap")
        base = 0.0 if self.table_x[0] <= 0.0 <= self.table_x[-1] else self.table_x[0]
        return prim(x) - prim(base)

    def tabulate(self, xs) -> "LineMap":
        xs = np.asarray(xs, dtype=float)
        return LineMap.from_table(xs, self(xs), name=f"{self.name}-table", lift=self.lift)


class RatioDistortionProfile(BaseModel):
    """Worst symmetric-ratio deviation per scale"""
    scales: List[float] = Field(description="Strictly decreasing positive scales")
    epsilon: List[float] = Field(description="max(ratio, 1/ratio) - 1 at each scale")

    @model_validator(mode="after")
    def _check(self) -> "RatioDistortionProfile":
        if len(self.scales) != len(self.epsilon):
            raise ValueError("scales and epsilon differ in length")
        if not all(s > t for s, t in zip(self.scales, self.scales[1:])):
            raise ValueError("scales must be strictly decreasing")
        if any(e < 0 for e in self.epsilon):
            raise ValueError("ratio deviations are non-negative")
        return self

    def trends_to_zero(self, factor: float = 0.5) -> bool:
        """True when the finest scale improved on the coarsest by at least the given factor."""
        if not self.epsilon or self.epsilon[0] == 0.0:
            return True
        return self.epsilon[-1] <= factor * self.epsilon[0]


class QsEstimate(BaseModel):
    """Grid estimate of a quasisymmetry constant under refinement"""
    lower_bound: float = Field(ge=1.0, description="Maximum on the finest grid, a certified lower bound")
    levels: List[float] = Field(description="Maximum per refinement level, coarse to fine")
    converged: bool = Field(description="Last two levels agree within the relative tolerance")


class HolderCheck(BaseModel):
    """Fitted Hölder modulus |h(x) - h(y)| <= C |x - y|^alpha"""
    alpha: float = Field(description="Exponent under test")
    constant: float = Field(description="C fitted on the coarse pairs")
    worst_ratio: float = Field(description="max over all pairs of |h(x)-h(y)| / (C |x-y|^alpha)")
    pairs: int = Field(description="Number of sampled pairs")

    @property
    def holds(self) -> bool:
        return self.worst_ratio <= 1.0 + 1e-9


class NeighborhoodSearch(BaseModel):
    """Largest candidate δ with V(δ)∘V(δ) inside V(ε) for a map family"""
    eps: float = Field(gt=0, description="Target neighborhood radius ε")
    delta: Optional[float] = Field(default=None, description="Chosen δ, None when no candidate works")
    members: List[str] = Field(default_factory=list, description="Family members inside V(δ)")
    checked: int = Field(default=0, ge=0, description="Compositions tested for the chosen δ")
    rejected: List[float] = Field(default_factory=list, description="Larger candidates that failed, largest first")

    @property
    def found(self) -> bool:
        return self.delta is not None


class PowerLawSystem(BaseModel):
    """Two linear dynamics x -> λ0 x, x -> λ1 x and the power-law map conjugating them"""
    model_config = ConfigDict(frozen=True)

    lambda0: float = Field(gt=1.0, description="Expansion factor of the first dynamics")
    lambda1: float = Field(gt=1.0, description="Expansion factor of the second dynamics")
    conjugacy: LineMap = Field(description="h with h(λ0 x) = λ1 h(x)")

    @property
    def exponent(self) -> float:
        return math.log(self.lambda1) / math.log(self.lambda0)

    def conjugacy_defect(self, xs) -> float:
        """max |h(λ0 x) - λ1 h(x)| over the sample points."""
        xs = np.asarray(xs, dtype=float)
        h = self.conjugacy
        return float(np.max(np.abs(h(self.lambda0 * xs) - self.lambda1 * h(xs))))


class PlaneExtension(BaseModel):
    """Self-map of the upper half-plane with prescribed boundary values"""
    model_config = ConfigDict(use_enum_values=True, frozen=True)

    name: str = Field(default="extension", description="Identifier used in reports")
    boundary: LineMap = Field(description="Boundary homeomorphism")
    doubled: bool = Field(default=True, description="Doubled imaginary part of the averaging formula")
    reflect: bool = Field(default=True, description="Extend to the lower half-plane by H(z̄) = conj H(z)")
    evaluator: Callable = Field(exclude=True, description="H on the open upper half-plane, vectorised")

    def __call__(self, z):
        scalar = np.ndim(z) == 0
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        y = z.imag
        out = np.empty_like(z)
        upper = y > 0
        lower = y < 0
        axis = ~(upper | lower)
        if upper.any():
            out[upper] = self.evaluator(z[upper])
        if lower.any():
            if not self.reflect:
                raise DomainError("extension is only defined on the upper half-plane", module="extension")
            out[lower] = np.conj(self.evaluator(np.conj(z[lower])))
        if axis.any():
            out[axis] = self.boundary(z[axis].real)
        if scalar:
            return complex(out[0])
        return out


class DiscExtension(BaseModel):
    """Extension of a circle map to the unit disc, descended from its lift through w = e^{2πiz}"""
    model_config = ConfigDict(frozen=True)

    lift: PlaneExtension = Field(description="Periodic extension of the lift on the upper half-plane")

    def __call__(self, w):
        scalar = np.ndim(w) == 0
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        out = np.zeros_like(w)
        inside = w != 0
        if np.any(np.abs(w) >= 1):
            raise DomainError("disc extension is evaluated inside the unit disc", module="extension")
        z = np.log(w[inside]) / (2j * math.pi)
        out[inside] = np.exp(2j * math.pi * self.lift(z))
        return complex(out[0]) if scalar else out


class DilatationField(BaseModel):
    """Beltrami coefficient and local dilatation sampled on grid nodes"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str = Field(default="dilatation", description="Extension identifier")
    z: np.ndarray = Field(description="Grid nodes")
    mu: np.ndarray = Field(description="Beltrami coefficient per node")
    k: np.ndarray = Field(description="Local dilatation per node")

    @model_validator(mode="after")
    def _check(self) -> "DilatationField":
        if not (self.z.shape == self.mu.shape == self.k.shape):
            raise ValueError("node, coefficient and dilatation arrays differ in shape")
        return self

    @property
    def k_max(self) -> float:
        return float(np.max(self.k)) if self.k.size else 1.0

    @property
    def mu_sup(self) -> float:
        return float(np.max(np.abs(self.mu))) if self.mu.size else 0.0

    def consistency_defect(self) -> float:
        """max |K_z - (1+|μ|)/(1-|μ|)| over the nodes."""
        a = np.abs(self.mu)
        return float(np.max(np.abs(self.k - (1 + a) / (1 - a)))) if self.k.size else 0.0

    def rows(self) -> List[List[float]]:
        return [
            [float(z.real), float(z.imag), float(m.real), float(m.imag), float(k)]
            for z, m, k in zip(self.z, self.mu, self.k)
        ]
