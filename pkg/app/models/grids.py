"""Models for quadrature grids, tolerances and quadrature results"""

import logging
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.integrate import quad_vec

from app.errors import ConvergenceError

logger = logging.getLogger(__name__)


@lru_cache(maxsize=64)
def _gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(order)
    return nodes, weights


def _graded_breakpoints(lo: float, hi: float, centers: List[float], h_min: float, ratio: float) -> np.ndarray:
    """Breakpoints in [lo, hi] refined geometrically toward each center."""
    points = {lo, hi}
    for c in centers:
        if lo <= c <= hi:
            points.add(c)
        offset = h_min
        reach = 2.0 * (hi - lo)
        while offset < reach:
            for p in (c - offset, c + offset):
                if lo < p < hi:
                    points.add(p)
            offset *= ratio
    pts = np.array(sorted(points))
    # drop breakpoints closer than half the finest spacing
    keep = [pts[0]]
    for p in pts[1:]:
        if p - keep[-1] >= 0.5 * h_min:
            keep.append(p)
        elif p == pts[-1]:
            keep[-1] = p
    return np.array(keep)


def _split_wide(breaks: np.ndarray, max_width: Optional[float]) -> np.ndarray:
    if max_width is None:
        return breaks
    out = [breaks[0]]
    for a, b in zip(breaks[:-1], breaks[1:]):
        pieces = int(np.ceil((b - a) / max_width))
        if pieces > 1:
            out.extend(a + (b - a) * np.arange(1, pieces) / pieces)
        out.append(b)
    return np.array(out)


def _panel_rule(breaks: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    s, w = _gauss_legendre(order)
    a = breaks[:-1][:, None]
    b = breaks[1:][:, None]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b) + half * s[None, :]).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def primitive_by_quadrature(func, x, rel_tol: float = 1e-12, samples: int = 33, limit: int = 10000):
    """
    ∫_0^x func for an array of upper limits, as ∫_0^1 func(s x) x ds in one vector quadrature.

    The absolute tolerance is rel_tol times the largest sampled integrand value, so a
    round-off sized integrand is not refined down to the floating point floor.

    Raises:
        ConvergenceError: quad_vec exhausted its interval budget
    """
    x = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x).ravel()

    def integrand(s):
        return func(s * flat) * flat

    scale = max(float(np.max(np.abs(integrand(s)))) for s in np.linspace(0.0, 1.0, samples))
    if scale == 0.0:
        value = np.zeros(flat.shape)
    else:
        value, err, info = quad_vec(integrand, 0.0, 1.0, epsabs=rel_tol * scale, epsrel=rel_tol,
                                    norm="max", limit=limit, full_output=True)
        if not info.success:
            raise ConvergenceError(
                f"primitive quadrature stopped after {info.intervals.shape[0]} intervals "
                f"with error {err:.3e} against integrand scale {scale:.3e}",
                module="grids"
            )
    value = np.asarray(value, dtype=float)
    if x.ndim == 0:
        return float(value[0])
    return value.reshape(x.shape)


class Tolerance(BaseModel):
    """Stopping rule for refinement loops"""
    abs_tol: float = Field(default=1e-10, gt=0, description="Absolute tolerance")
    rel_tol: float = Field(default=1e-7, gt=0, description="Relative tolerance")
    max_depth: int = Field(default=3, ge=1, description="Maximum number of refinement levels")

    def target(self, magnitude: float) -> float:
        return max(self.abs_tol, self.rel_tol * magnitude)


class HalfPlaneGrid(BaseModel):
    """
    Tensor-product Gauss-Legendre discretisation of a truncated upper half-plane.

    Panels in x are graded geometrically toward the real parts of the focus points,
    panels in y toward the real axis and toward the heights of interior focus points.
    """
    model_config = ConfigDict(frozen=True)

    x_min: float = Field(default=-1e3, description="Left edge of the horizontal extent")
    x_max: float = Field(default=1e3, description="Right edge of the horizontal extent")
    y_min: float = Field(default=1e-4, gt=0, description="Inner cutoff height")
    y_max: float = Field(default=1e3, description="Truncation height")
    focus_points: List[Tuple[float, float]] = Field(
        default_factory=list,
        description="Points (x, y), y >= 0, toward which panels are refined"
    )
    order: int = Field(default=8, ge=1, description="Gauss-Legendre order per panel at level 0")
    order_step: int = Field(default=4, ge=0, description="Order increase per refinement level")
    ratio: float = Field(default=2.0, gt=1, description="Geometric grading ratio")
    graded: bool = Field(default=True, description="Grade panels toward focus points and the axis")
    max_dx: Optional[float] = Field(default=None, gt=0, description="Largest admissible panel width in x")
    max_dy: Optional[float] = Field(default=None, gt=0, description="Largest admissible panel height in y")

    @model_validator(mode="after")
    def _check_extent(self) -> "HalfPlaneGrid":
        if self.x_max <= self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.y_max <= self.y_min:
            raise ValueError("y_max must exceed y_min")
        for _, y in self.focus_points:
            if y < 0:
                raise ValueError("focus points must lie in the closed upper half-plane")
        return self

    @classmethod
    def symmetric(cls, extent: float = 1e3, y_min: float = 1e-4, **kwargs) -> "HalfPlaneGrid":
        return cls(x_min=-extent, x_max=extent, y_min=y_min, y_max=kwargs.pop("y_max", extent), **kwargs)

    @classmethod
    def lattice(cls, x_min: float, x_max: float, y_min: float, y_max: float, nx: int, ny: int) -> "HalfPlaneGrid":
        """Uniform sampling lattice: one midpoint node per cell."""
        return cls(
            x_min=x_min, x_max=x_max, y_min=y_min, y_max=y_max,
            order=1, order_step=0, graded=False,
            max_dx=(x_max - x_min) / nx * (1 + 1e-12),
            max_dy=(y_max - y_min) / ny * (1 + 1e-12),
        )

    def with_focus(self, points: List[Tuple[float, float]]) -> "HalfPlaneGrid":
        merged = list(self.focus_points) + [(float(x), float(y)) for x, y in points]
        return self.model_copy(update={"focus_points": merged})

    def x_breaks(self) -> np.ndarray:
        if not self.graded:
            return _split_wide(np.array([self.x_min, self.x_max]), self.max_dx)
        centers = [x for x, _ in self.focus_points] or [0.5 * (self.x_min + self.x_max)]
        if 0.0 not in centers and self.x_min < 0.0 < self.x_max:
            centers.append(0.0)
        breaks = _graded_breakpoints(self.x_min, self.x_max, centers, self.y_min, self.ratio)
        return _split_wide(breaks, self.max_dx)

    def y_breaks(self) -> np.ndarray:
        if not self.graded:
            return _split_wide(np.array([self.y_min, self.y_max]), self.max_dy)
        points = {self.y_min, self.y_max}
        y = self.y_min
        while y < self.y_max:
            points.add(y)
            y *= self.ratio
        breaks = np.array(sorted(points))
        interior = [y for _, y in self.focus_points if self.y_min < y < self.y_max]
        if interior:
            breaks = _graded_breakpoints(self.y_min, self.y_max, interior, self.y_min, self.ratio)
            breaks = np.union1d(breaks, np.array(sorted(points)))
        return _split_wide(breaks, self.max_dy)

    def level_order(self, level: int) -> int:
        return self.order + self.order_step * level

    def nodes(self, level: int = 0) -> Tuple[np.ndarray, np.ndarray]:
        """
        Quadrature nodes and weights at a refinement level.

        Args:
            level: Refinement level; the per-panel order is order + order_step * level

        Returns:
            (complex nodes, positive weights), flattened
        """
        order = self.level_order(level)
        xs, wx = _panel_rule(self.x_breaks(), order)
        ys, wy = _panel_rule(self.y_breaks(), order)
        z = (xs[None, :] + 1j * ys[:, None]).ravel()
        w = (wy[:, None] * wx[None, :]).ravel()
        return z, w

    def points(self) -> np.ndarray:
        return self.nodes(0)[0]


class QuadratureResult(BaseModel):
    """Outcome of a half-plane quadrature"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    value: complex = Field(description="Quadrature value (tail correction included when requested)")
    error: float = Field(description="Estimated absolute error")
    converged: bool = Field(description="True when the error estimate met the tolerance")
    levels: int = Field(description="Refinement levels evaluated")
    nodes: int = Field(description="Nodes at the final level")
    tail: float = Field(default=0.0, description="Estimated contribution outside the truncation rectangle")
    components: Optional[List[complex]] = Field(
        default=None,
        description="Per-component values for vector-valued integrands"
    )
