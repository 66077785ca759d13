"""Models for summability kernels and approximation-rate profiles"""

import math
from enum import Enum
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class KernelKind(str, Enum):
    """Summability kernel family"""
    FEJER = "fejer"
    JACKSON_PAPER = "jackson-paper"   # σ_{2n-1} - 2σ_n, mass -1
    JACKSON_VDP = "jackson-vdp"       # 2σ_{2n} - σ_n, delayed means


def fejer_multipliers(n: int, k) -> np.ndarray:
    """Fourier multipliers (1 - |k|/n)_+ of the Fejér kernel σ_n."""
    k = np.abs(np.asarray(k, dtype=float))
    return np.clip(1.0 - k / n, 0.0, None)


def fejer_values(n: int, t) -> np.ndarray:
    """σ_n(t) = (1/2πn) (sin(nt/2) / sin(t/2))², with the limit n/2π where sin(t/2) = 0."""
    t = np.asarray(t, dtype=float)
    s = np.sin(0.5 * t)
    small = np.abs(s) < 1e-12
    safe = np.where(small, 1.0, s)
    ratio = np.where(small, float(n), np.sin(0.5 * n * t) / safe)
    return ratio * ratio / (2.0 * math.pi * n)


class TrigKernel(BaseModel):
    """Trigonometric kernel of a given family and parameter n"""
    model_config = ConfigDict(use_enum_values=True, frozen=True)

    n: int = Field(ge=1, description="Kernel parameter")
    kind: KernelKind = Field(default=KernelKind.JACKSON_VDP, description="Kernel family")

    @property
    def trig_degree(self) -> int:
        if self.kind == KernelKind.FEJER.value:
            return self.n - 1
        return 2 * self.n - 1 if self.kind == KernelKind.JACKSON_VDP.value else 2 * self.n - 2

    def multipliers(self, k) -> np.ndarray:
        """Fourier multiplier applied to the k-th harmonic by convolution with the kernel."""
        n = self.n
        if self.kind == KernelKind.FEJER.value:
            return fejer_multipliers(n, k)
        if self.kind == KernelKind.JACKSON_VDP.value:
            return 2.0 * fejer_multipliers(2 * n, k) - fejer_multipliers(n, k)
        return fejer_multipliers(2 * n - 1, k) - 2.0 * fejer_multipliers(n, k)

    @property
    def mass(self) -> float:
        return float(self.multipliers(0))

    def __call__(self, t):
        n = self.n
        if self.kind == KernelKind.FEJER.value:
            value = fejer_values(n, t)
        elif self.kind == KernelKind.JACKSON_VDP.value:
            value = 2.0 * fejer_values(2 * n, t) - fejer_values(n, t)
        else:
            value = fejer_values(2 * n - 1, t) - 2.0 * fejer_values(n, t)
        if np.ndim(value) == 0:
            return float(value)
        return value


class RateProfile(BaseModel):
    """Approximation error per degree, with the scaled error n * err"""
    n: List[int] = Field(description="Increasing kernel parameters")
    error: List[float] = Field(description="Sup-norm approximation error per n")

    @model_validator(mode="after")
    def _check(self) -> "RateProfile":
        if len(self.n) != len(self.error):
            raise ValueError("n and error differ in length")
        if any(a >= b for a, b in zip(self.n, self.n[1:])):
            raise ValueError("n must be strictly increasing")
        return self

    @property
    def scaled(self) -> List[float]:
        return [n * e for n, e in zip(self.n, self.error)]

    @property
    def bound(self) -> float:
        """Measured constant C' = max n * err."""
        return max(self.scaled, default=0.0)

    def spread(self) -> float:
        """max / min of the scaled errors, ignoring exact zeros."""
        values = [v for v in self.scaled if v > 0]
        if not values:
            return 1.0
        return max(values) / min(values)

    def rows(self) -> List[List[float]]:
        return [[n, e, n * e] for n, e in zip(self.n, self.error)]
