"""Models for rational quadratic differentials and two-sided Beltrami coefficients"""

from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class RationalQD(BaseModel):
    """
    Holomorphic quadratic differential with simple poles on the real line,
    held in partial-fraction form φ(z) = Σ r_j / (z - p_j).
    """
    model_config = ConfigDict(frozen=True)

    name: str = Field(default="phi", description="Identifier used in reports")
    poles: List[float] = Field(description="Distinct real poles, increasing")
    residues: List[float] = Field(description="Real residue at each pole")
    basis_points: Optional[List[float]] = Field(
        default=None,
        description="Points x_j of the basis form Σ λ_j φ_{x_j}, when built that way"
    )
    basis_weights: Optional[List[float]] = Field(default=None, description="Weights λ_j of the basis form")

    @model_validator(mode="after")
    def _check(self) -> "RationalQD":
        if len(self.poles) != len(self.residues):
            raise ValueError("poles and residues differ in length")
        if any(p >= q for p, q in zip(self.poles, self.poles[1:])):
            raise ValueError("poles must be distinct and increasing")
        return self

    @classmethod
    def from_partial_fractions(cls, poles: Sequence[float], residues: Sequence[float], name: str = "phi",
                               drop_tol: float = 0.0) -> "RationalQD":
        merged: Dict[float, float] = {}
        for p, r in zip(poles, residues):
            merged[float(p)] = merged.get(float(p), 0.0) + float(r)
        scale = max((abs(r) for r in merged.values()), default=0.0)
        items = sorted((p, r) for p, r in merged.items() if abs(r) > drop_tol * scale)
        return cls(name=name, poles=[p for p, _ in items], residues=[r for _, r in items])

    @classmethod
    def from_basis(cls, points: Sequence[float], weights: Sequence[float], name: str = "phi") -> "RationalQD":
        """
        Combination Σ λ_j φ_{x_j} with φ_x(z) = x(x-1)/(z(z-1)(z-x)).

        φ_x has residues x-1 at 0, -x at 1 and 1 at x; the 0 and 1 residues are merged.
        """
        poles: List[float] = []
        residues: List[float] = []
        for x, lam in zip(points, weights):
            x = float(x)
            if x in (0.0, 1.0):
                raise ValueError(f"basis differential is degenerate at x = {x}")
            poles += [0.0, 1.0, x]
            residues += [lam * (x - 1.0), -lam * x, float(lam)]
        phi = cls.from_partial_fractions(poles, residues, name=name, drop_tol=1e-15)
        return phi.model_copy(update={
            "basis_points": [float(x) for x in points],
            "basis_weights": [float(w) for w in weights],
        })

    @classmethod
    def from_polynomial(cls, numerator: Sequence[float], poles: Sequence[float], name: str = "phi") -> "RationalQD":
        """
        p(z) / Π (z - x_j) with numerator coefficients in increasing degree.

        Residues are p(x_j) / Π_{k≠j} (x_j - x_k); the numerator degree must stay below
        the pole count so there is no polynomial part.
        """
        poles = [float(p) for p in poles]
        if len(numerator) > len(poles):
            raise ValueError("numerator degree must be below the number of poles")
        poly = np.polynomial.Polynomial(numerator)
        residues = []
        for j, xj in enumerate(poles):
            others = np.array([xj - xk for k, xk in enumerate(poles) if k != j])
            residues.append(float(poly(xj) / np.prod(others)))
        return cls.from_partial_fractions(poles, residues, name=name)

    def moments(self, count: int = 4) -> List[float]:
        """Σ r_j p_j^m for m = 0..count-1; φ(z) = Σ_m moment_m z^{-m-1} near infinity."""
        p = np.asarray(self.poles)
        r = np.asarray(self.residues)
        return [float(np.sum(r * p ** m)) for m in range(count)]

    def asymptotic(self, rel_tol: float = 1e-12) -> Tuple[float, int]:
        """
        Leading behaviour |φ(z)| ~ |A| |z|^{-p} at infinity.

        Returns:
            (|A|, p), with A = 0 for the zero differential
        """
        if not self.poles:
            return 0.0, 4
        p = np.asarray(self.poles)
        r = np.asarray(self.residues)
        scale = float(np.sum(np.abs(r) * np.maximum(1.0, np.abs(p)) ** (len(p) + 1)))
        for m in range(len(p) + 1):
            moment = float(np.sum(r * p ** m))
            if abs(moment) > rel_tol * scale:
                return abs(moment), m + 1
        return 0.0, len(p) + 2

    @property
    def is_integrable(self) -> bool:
        _, power = self.asymptotic()
        return power >= 3

    @property
    def is_zero(self) -> bool:
        return all(r == 0.0 for r in self.residues)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        value = np.zeros_like(z)
        for p, r in zip(self.poles, self.residues):
            value = value + r / (z - p)
        return value

    def scaled(self, factor: float) -> "RationalQD":
        return self.model_copy(update={"residues": [factor * r for r in self.residues]})

    def affine_image(self, a: float, b: float) -> "RationalQD":
        """
        Pullback φ(w) under w = (z - b) / a, a > 0, as a quadratic differential:
        poles move to (p - b) / a and residues scale by a.

        The L1 norm over the half-plane is invariant.
        """
        return RationalQD(
            name=self.name,
            poles=[(p - b) / a for p in self.poles],
            residues=[r * a for r in self.residues]
        )


class Symmetry(str, Enum):
    """Declared reflection symmetry of a two-sided coefficient"""
    SYMMETRIC = "symmetric"          # μ(z̄) = conj μ(z)
    ANTISYMMETRIC = "antisymmetric"  # μ(z̄) = -conj μ(z)
    ZERO_BELOW = "zero-below"        # μ = 0 on the lower half-plane
    AD_HOC = "ad-hoc"


class TwoSidedBeltrami(BaseModel):
    """Essentially bounded coefficient on both half-planes, held as a pair of evaluators"""
    model_config = ConfigDict(use_enum_values=True, frozen=True)

    name: str = Field(default="mu", description="Identifier used in reports")
    upper: Callable = Field(exclude=True, description="μ on the upper half-plane, vectorised")
    lower: Callable = Field(exclude=True, description="μ on the lower half-plane, vectorised")
    symmetry: Symmetry = Field(default=Symmetry.AD_HOC, description="Declared reflection symmetry")
    sup_bound: Optional[float] = Field(default=None, ge=0, description="Declared essential supremum")

    @classmethod
    def symmetric(cls, upper: Callable, name: str = "mu", sup_bound: Optional[float] = None) -> "TwoSidedBeltrami":
        return cls(
            name=name,
            upper=upper,
            lower=lambda z: np.conj(upper(np.conj(z))),
            symmetry=Symmetry.SYMMETRIC,
            sup_bound=sup_bound
        )

    @classmethod
    def zero_below(cls, upper: Callable, name: str = "mu", sup_bound: Optional[float] = None) -> "TwoSidedBeltrami":
        return cls(
            name=name,
            upper=upper,
            lower=lambda z: np.zeros_like(np.asarray(z, dtype=complex)),
            symmetry=Symmetry.ZERO_BELOW,
            sup_bound=sup_bound
        )

    @classmethod
    def constant(cls, upper: complex, lower: complex, name: str = "const",
                 symmetry: Symmetry = Symmetry.AD_HOC) -> "TwoSidedBeltrami":
        return cls(
            name=name,
            upper=lambda z: np.full(np.shape(z), upper, dtype=complex),
            lower=lambda z: np.full(np.shape(z), lower, dtype=complex),
            symmetry=symmetry,
            sup_bound=max(abs(upper), abs(lower))
        )

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        up = z.imag > 0
        down = z.imag < 0
        if np.ndim(z) == 0:
            if up:
                return complex(self.upper(z))
            if down:
                return complex(self.lower(z))
            return 0j
        if up.any():
            out[up] = self.upper(z[up])
        if down.any():
            out[down] = self.lower(z[down])
        return out

    def symmetry_defect(self, points) -> float:
        """max |μ(z̄) - conj μ(z)| over upper half-plane sample points."""
        z = np.asarray(points, dtype=complex)
        z = z[z.imag > 0]
        return float(np.max(np.abs(self.lower(np.conj(z)) - np.conj(self.upper(z))), initial=0.0))

    def sampled_sup(self, points) -> float:
        z = np.asarray(points, dtype=complex)
        z = z[z.imag != 0]
        return float(np.max(np.abs(self(z)), initial=0.0))

    def sup_norm(self, points=None) -> float:
        """Declared bound when present, else the sampled maximum."""
        if self.sup_bound is not None:
            return self.sup_bound
        if points is None:
            raise ValueError(f"coefficient {self.name} has no declared bound; pass sample points")
        return self.sampled_sup(points)
