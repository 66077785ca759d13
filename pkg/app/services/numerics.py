"""Numerics Service - half-plane quadrature, circle principal values, finite differences"""

import logging
import math
import warnings
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate

from app.errors import ConvergenceError, DomainError
from app.models.grids import HalfPlaneGrid, QuadratureResult, Tolerance

logger = logging.getLogger(__name__)

MODULE = "numerics"


def _check_finite(values: np.ndarray, z: np.ndarray) -> None:
    finite = np.isfinite(values)
    if finite.all():
        return
    flat = np.argwhere(~finite)[0]
    node = z[flat[-1]]
    raise DomainError(
        f"integrand is not finite at node z = {node.real:.6g}{node.imag:+.6g}i",
        module=MODULE
    )


def _sum_nodes(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    # np.sum uses pairwise summation in a fixed order
    return np.sum(values * weights, axis=-1)


def halfplane_tail(grid: HalfPlaneGrid, amplitude: float, power: float) -> float:
    """
    Integral of amplitude * |z|^(-power) over the part of the upper half-plane
    outside the truncation rectangle of the grid.

    Args:
        grid: Grid whose x extent and y_max define the rectangle
        amplitude: Leading coefficient |A| of the integrand's decay
        power: Decay exponent p, must exceed 2

    Returns:
        Tail estimate (non-negative)
    """
    if power <= 2:
        raise DomainError(f"decay exponent {power} is not integrable at infinity", module=MODULE)
    if amplitude == 0:
        return 0.0

    p = float(power)
    b_p = math.sqrt(math.pi) * math.gamma(0.5 * (p - 1)) / math.gamma(0.5 * p)

    def density(y: float, x: float) -> float:
        return (x * x + y * y) ** (-0.5 * p)

    def corner(x_edge: float) -> float:
        value, _ = integrate.dblquad(density, x_edge, np.inf, grid.y_max, np.inf)
        return value

    left = -grid.x_min if grid.x_min < 0 else np.inf
    right = grid.x_max if grid.x_max > 0 else np.inf
    above = b_p * grid.y_max ** (2 - p) / (p - 2)
    sides = 0.0
    overlap = 0.0
    for edge in (left, right):
        if np.isfinite(edge):
            sides += 0.5 * b_p * edge ** (2 - p) / (p - 2)
            overlap += corner(edge)
    return float(abs(amplitude) * (above + sides - overlap))


def integrate_halfplane(
    f: Callable[[np.ndarray], np.ndarray],
    grid: HalfPlaneGrid,
    tol: Optional[Tolerance] = None,
    decay: Optional[Tuple[float, float]] = None,
    correct_tail: bool = False
) -> QuadratureResult:
    """
    Integrate a field over the truncated upper half-plane by p-refinement.

    The integrand is evaluated on the grid at increasing Gauss-Legendre orders; the
    error estimate is the change between the last two levels. Vector-valued integrands
    (f returning shape (m, N)) are integrated on shared nodes and reported per component.

    Args:
        f: Vectorised integrand of complex node positions
        grid: Truncated half-plane discretisation
        tol: Stopping rule; depth counts refinements after the base level
        decay: Optional (|A|, p) with |f| ~ |A| |z|^(-p) at infinity
        correct_tail: Add the tail estimate to the value instead of to the error

    Returns:
        QuadratureResult, flagged converged=False when the tolerance was not met
    """
    tol = tol or Tolerance()
    previous = None
    estimate = np.inf
    current = None
    n_nodes = 0
    level = 0

    for level in range(tol.max_depth + 1):
        z, w = grid.nodes(level)
        values = np.asarray(f(z))
        if values.shape[-1] != z.shape[0]:
            raise DomainError(
                f"integrand returned shape {values.shape} for {z.shape[0]} nodes",
                module=MODULE
            )
        _check_finite(values, z)
        current = np.atleast_1d(_sum_nodes(values.astype(complex), w))
        n_nodes = z.shape[0]

        if previous is not None:
            estimate = float(np.max(np.abs(current - previous)))
            magnitude = float(np.max(np.abs(current)))
            if estimate <= tol.target(magnitude):
                break
        previous = current

    tail = 0.0
    if decay is not None:
        tail = halfplane_tail(grid, decay[0], decay[1])

    values = current.copy()
    error = estimate
    if correct_tail:
        values = values + tail
    else:
        error = estimate + tail

    magnitude = float(np.max(np.abs(values)))
    converged = bool(estimate <= tol.target(magnitude))
    if not converged:
        logger.warning(
            f"Half-plane quadrature not converged after {level + 1} levels: "
            f"error estimate {estimate:.3e}, value {magnitude:.6e}"
        )

    components = [complex(v) for v in values] if values.shape[0] > 1 else None
    return QuadratureResult(
        value=complex(values[0]),
        error=float(error),
        converged=converged,
        levels=level + 1,
        nodes=n_nodes,
        tail=tail,
        components=components
    )


def _probe_singularities(g: Callable, x: float, width: float) -> None:
    probe = x + np.linspace(-math.pi, math.pi, 1025)
    probe = probe[np.abs(probe - x) > width]
    with np.errstate(all="ignore"):
        values = np.asarray(g(probe), dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        raise DomainError(
            f"integrand is singular at y = {probe[bad][0]:.6g}, away from x = {x:.6g}",
            module=MODULE
        )


def pv_circle_integral(
    g: Callable[[np.ndarray], np.ndarray],
    x: float,
    tol: Optional[Tolerance] = None,
    eps: float = 0.1,
    max_halvings: int = 80
) -> float:
    """
    Symmetric principal value of a 2π-periodic integrand over one period centred at x.

    The integrand is folded about x, h(s) = g(x+s) + g(x-s), which cancels the simple
    singularity. The value on [eps, π] is extended by shells [eps/2, eps] until a shell
    contributes less than the tolerance.

    Args:
        g: Vectorised periodic integrand
        x: Singular angle in radians
        tol: Stopping rule for the excision limit
        eps: Initial excision half-width
        max_halvings: Number of shells allowed before giving up

    Returns:
        The principal value (no normalisation prefactor)
    """
    tol = tol or Tolerance()
    _probe_singularities(g, x, 0.5 * eps)

    def folded(s):
        return float(g(np.asarray(x + s)) + g(np.asarray(x - s)))

    def piece(a: float, b: float) -> float:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", integrate.IntegrationWarning)
                value, err = integrate.quad(folded, a, b, epsabs=0.1 * tol.abs_tol, epsrel=0.1 * tol.rel_tol, limit=200)
        except integrate.IntegrationWarning as e:
            raise DomainError(
                f"principal value integrand is singular away from x = {x:.6g}: {e}",
                module=MODULE
            )
        return value

    total = piece(eps, math.pi)
    width = eps
    for _ in range(max_halvings):
        shell = piece(0.5 * width, width)
        total += shell
        width *= 0.5
        if abs(shell) < tol.target(abs(total)):
            return float(total)

    raise ConvergenceError(
        f"principal value at x = {x:.6g} did not settle after {max_halvings} halvings",
        module=MODULE
    )


def second_difference(V: Callable, x, t):
    """
    Symmetric second difference V(x+t) - 2V(x) + V(x-t).

    Args:
        V: Field or callable evaluated on the line (or in the angle chart)
        x: Base point(s)
        t: Step(s), strictly positive

    Returns:
        Second difference, broadcast over x and t
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise DomainError(f"second difference step must be positive, got {t}", module=MODULE)
    x_arr = np.asarray(x, dtype=float)
    result = V(x_arr + t_arr) - 2.0 * V(x_arr) + V(x_arr - t_arr)
    if np.ndim(result) == 0:
        return float(result)
    return result
