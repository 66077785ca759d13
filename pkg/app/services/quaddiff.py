"""Quadratic Differential Service - norms, the pairing with vector fields, V_μ and the Bers map"""

import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from app.errors import DomainError
from app.models.differentials import RationalQD, Symmetry, TwoSidedBeltrami
from app.models.fields import Chart, FieldExtension, VectorField
from app.models.grids import HalfPlaneGrid, QuadratureResult, Tolerance
from app.models.reports import SampledNorm
from app.services.numerics import integrate_halfplane

logger = logging.getLogger(__name__)

MODULE = "quaddiff"

Coefficient = Union[TwoSidedBeltrami, FieldExtension, Callable]


def basis_differential(x: float) -> RationalQD:
    """φ_x(z) = x(x-1) / (z(z-1)(z-x))."""
    if x in (0.0, 1.0):
        raise DomainError(f"basis differential is degenerate at x = {x}", module=MODULE)
    return RationalQD.from_basis([x], [1.0], name=f"phi_{x:g}")


def degenerating_sequence(x: float, t: float) -> RationalQD:
    """
    φ = 2t / ((z - (x-t))(z - x)(z - (x+t))), residues 1/t, -2/t, 1/t.

    All members have the same norm; they tend to zero pointwise as t -> 0.
    """
    if t <= 0:
        raise DomainError(f"degenerating family needs t > 0, got {t}", module=MODULE)
    return RationalQD.from_partial_fractions(
        [x - t, x, x + t], [1.0 / t, -2.0 / t, 1.0 / t], name=f"degen({x:g},{t:g})"
    )


def _upper_coefficient(mu: Coefficient) -> Callable:
    if isinstance(mu, TwoSidedBeltrami):
        return mu.upper
    if isinstance(mu, FieldExtension):
        return mu.dbar
    return mu


def pole_frame(phi: RationalQD):
    """Affine parameters (a, b) sending the pole hull onto [-1, 1]."""
    lo, hi = min(phi.poles), max(phi.poles)
    a = 0.5 * (hi - lo) if hi > lo else 1.0
    b = 0.5 * (hi + lo)
    return a, b


def qd_norm(phi: RationalQD, grid: Optional[HalfPlaneGrid] = None, tol: Optional[Tolerance] = None,
            detail: bool = False) -> Union[float, QuadratureResult]:
    """
    L1 norm ∫∫_H |φ| of an integrable rational differential.

    The differential is moved to its pole frame (hull of the poles onto [-1, 1]); the norm
    is invariant under that move, so translated and rescaled families share one value.
    The analytic tail of the leading |A||z|^-p decay is added outside the truncation.

    Args:
        phi: Rational differential with simple real poles
        grid: Base grid, refined toward the poles
        tol: Quadrature tolerance
        detail: Return the full QuadratureResult

    Returns:
        The norm, or the quadrature result when detail is set
    """
    if phi.is_zero:
        result = QuadratureResult(value=0j, error=0.0, converged=True, levels=0, nodes=0)
        return result if detail else 0.0
    amplitude, power = phi.asymptotic()
    if power < 3:
        raise DomainError(
            f"{phi.name} is not integrable: |phi| decays like |z|^-{power} at infinity",
            module=MODULE
        )
    a, b = pole_frame(phi)
    frame = phi.affine_image(a, b)
    grid = (grid or HalfPlaneGrid()).with_focus([(p, 0.0) for p in frame.poles])
    amplitude, power = frame.asymptotic()

    result = integrate_halfplane(lambda z: np.abs(frame(z)), grid, tol,
                                 decay=(amplitude, power), correct_tail=True)
    logger.debug(f"||{phi.name}|| = {result.value.real:.10g} (error {result.error:.2e})")
    return result if detail else float(result.value.real)


def pairing_integral(mu: Coefficient, phi: RationalQD, grid: Optional[HalfPlaneGrid] = None,
                     tol: Optional[Tolerance] = None, detail: bool = False) -> Union[float, QuadratureResult]:
    """
    Re ∫∫_H μ φ by half-plane quadrature.

    Args:
        mu: Two-sided coefficient (its upper half is used), a field extension (its ∂̄-field)
            or a vectorised callable on the upper half-plane
        phi: Integrable rational differential
        grid: Base grid, refined toward the poles
        tol: Quadrature tolerance
        detail: Return the full QuadratureResult (complex value) instead of the real part

    Returns:
        The pairing
    """
    upper = _upper_coefficient(mu)
    if phi.is_zero:
        return QuadratureResult(value=0j, error=0.0, converged=True, levels=0, nodes=0) if detail else 0.0
    grid = (grid or HalfPlaneGrid()).with_focus([(p, 0.0) for p in phi.poles])
    decay = None
    if isinstance(mu, TwoSidedBeltrami) and mu.sup_bound is not None:
        amplitude, power = phi.asymptotic()
        if power > 2:
            decay = (mu.sup_bound * amplitude, power)
    result = integrate_halfplane(lambda z: upper(z) * phi(z), grid, tol, decay=decay)
    return result if detail else float(result.value.real)


def _check_normalized(V: Callable, far: float, tol: float, growth_tol: float) -> None:
    v0 = float(V(np.asarray(0.0)))
    v1 = float(V(np.asarray(1.0)))
    growth = float((V(np.asarray(far)) + V(np.asarray(-far)) - 2.0 * v0) / (2.0 * far * far))
    if abs(v0) > tol or abs(v1) > tol or abs(growth) > growth_tol:
        raise DomainError(
            f"field is not normalised (V(0) = {v0:.3g}, V(1) = {v1:.3g}, quadratic growth {growth:.3g}); "
            f"apply project_out_quadratics first",
            module=MODULE
        )


def pairing_residue(V: Callable, phi: RationalQD, far: float = 1e4, tol: float = 1e-8,
                    growth_tol: float = 1e-6) -> float:
    """
    (V, φ) = (π/2) Σ r_j V(p_j) over the poles of φ.

    For the basis form Σ λ_j φ_{x_j} the residue at x_j is λ_j and the poles at 0 and 1
    drop out because V vanishes there.

    Args:
        V: Line-chart field with V(0) = V(1) = 0 and o(|u|²) growth
        phi: Rational differential
        far: Distance used to check the growth at infinity
        tol: Allowed |V(0)| and |V(1)|
        growth_tol: Allowed quadratic coefficient measured at distance far

    Returns:
        The pairing
    """
    if isinstance(V, VectorField) and V.chart != Chart.LINE.value:
        raise DomainError(f"field {V.name} must be in the line chart", module=MODULE)
    _check_normalized(V, far, tol, growth_tol)
    if phi.is_zero:
        return 0.0
    poles = np.asarray(phi.poles)
    residues = np.asarray(phi.residues)
    return float(0.5 * math.pi * np.sum(residues * np.asarray(V(poles), dtype=float)))


def z0_probe(V: Callable, x: float, scales: Sequence[float]) -> List[Dict[str, float]]:
    """Residue pairings of V with the degenerating family at x over the given scales."""
    return [
        {"t": float(t), "pairing": pairing_residue(V, degenerating_sequence(x, float(t)))}
        for t in scales
    ]


def _kernel(zeta: np.ndarray, z: complex) -> np.ndarray:
    return 1.0 / (zeta * (zeta - 1.0) * (zeta - z))


def _scaled(result: QuadratureResult, factor: complex) -> QuadratureResult:
    size = abs(factor)
    components = [factor * c for c in result.components] if result.components else None
    return result.model_copy(update={
        "value": factor * result.value,
        "error": size * result.error,
        "tail": size * result.tail,
        "components": components,
    })


def _representation_integral(mu: TwoSidedBeltrami, z: complex, grid: HalfPlaneGrid,
                             tol: Optional[Tolerance]) -> QuadratureResult:
    """
    ∫∫_C μ(ζ) / (ζ(ζ-1)(ζ-z)) with the lower half folded onto the upper one.

    The kernel decays like |ζ|⁻³, so a declared sup bound gives a tail estimate
    outside the truncation rectangle; it is added to the error.
    """
    focus = [(0.0, 0.0), (1.0, 0.0), (z.real, abs(z.imag))]
    if z.imag != 0:
        focus.append((z.real, 0.0))
    grid = grid.with_focus(focus)
    zero_below = mu.symmetry == Symmetry.ZERO_BELOW.value

    def integrand(zeta):
        value = mu.upper(zeta) * _kernel(zeta, z)
        if not zero_below:
            conj = np.conj(zeta)
            value = value + mu.lower(conj) * _kernel(conj, z)
        return value

    decay = None
    if mu.sup_bound is not None:
        decay = (mu.sup_bound * (1.0 if zero_below else 2.0), 3.0)
    return integrate_halfplane(integrand, grid, tol, decay=decay)


def v_mu(mu: TwoSidedBeltrami, z: complex, grid: Optional[HalfPlaneGrid] = None,
         tol: Optional[Tolerance] = None, detail: bool = False) -> Union[complex, QuadratureResult]:
    """
    V_μ(z) = -(z(z-1)/π) ∫∫_C μ(ζ) / (ζ(ζ-1)(ζ-z)) dξdη.

    The z(z-1) factor normalises V_μ(0) = V_μ(1) = 0 and leaves ∂̄V_μ = μ.

    Args:
        mu: Two-sided coefficient; a sup bound adds the truncation tail to the error
        z: Evaluation point, not 0 or 1
        grid: Base grid
        tol: Quadrature tolerance
        detail: Return the QuadratureResult with value, error and tail scaled to V_μ(z)

    Returns:
        V_μ(z)
    """
    z = complex(z)
    if z in (0j, 1 + 0j):
        raise DomainError(f"V_mu is normalised to vanish at z = {z.real:g}; evaluate elsewhere", module=MODULE)
    result = _scaled(_representation_integral(mu, z, grid or HalfPlaneGrid(), tol), -z * (z - 1.0) / math.pi)
    return result if detail else complex(result.value)


def bers_potential(mu: TwoSidedBeltrami, z: complex, grid: Optional[HalfPlaneGrid] = None,
                   tol: Optional[Tolerance] = None, detail: bool = False) -> Union[complex, QuadratureResult]:
    """W_μ(z) for a coefficient vanishing on the lower half-plane, z in the lower half-plane."""
    z = complex(z)
    if z.imag >= 0:
        raise DomainError("the Bers potential is evaluated on the lower half-plane", module=MODULE)
    upper_only = TwoSidedBeltrami.zero_below(mu.upper, name=mu.name, sup_bound=mu.sup_bound)
    return v_mu(upper_only, z, grid, tol, detail=detail)


def bers_map(mu: TwoSidedBeltrami, z: complex, grid: Optional[HalfPlaneGrid] = None,
             tol: Optional[Tolerance] = None, detail: bool = False) -> Union[complex, QuadratureResult]:
    """
    ψ(z) = (W_μ)'''(z) = -(6/π) ∫∫_H μ(ζ) / (ζ - z)^4 dξdη for z in the lower half-plane.

    Args:
        mu: Coefficient on the upper half-plane (the lower half is ignored)
        z: Point of the lower half-plane
        grid: Base grid
        tol: Quadrature tolerance
        detail: Return the QuadratureResult scaled to ψ(z), |ζ|⁻⁴ tail included

    Returns:
        ψ(z)
    """
    z = complex(z)
    if z.imag >= 0:
        raise DomainError(f"Bers map needs z in the lower half-plane, got {z}", module=MODULE)
    grid = (grid or HalfPlaneGrid()).with_focus([(z.real, 0.0)])
    decay = (mu.sup_bound, 4.0) if mu.sup_bound is not None else None
    result = integrate_halfplane(lambda zeta: mu.upper(zeta) / (zeta - z) ** 4, grid, tol, decay=decay)
    result = _scaled(result, -6.0 / math.pi)
    return result if detail else complex(result.value)


def b_norm(mu: TwoSidedBeltrami, points: Sequence[complex], grid: Optional[HalfPlaneGrid] = None,
           tol: Optional[Tolerance] = None, detail: bool = False) -> Union[float, SampledNorm]:
    """
    Sampled B-norm max |ψ(z)| y² over lower half-plane points.

    With detail the SampledNorm carries the largest weighted error and whether every
    Bers map evaluation converged.
    """
    best = 0.0
    worst_error = 0.0
    converged = True
    argmax = None
    for z in points:
        z = complex(z)
        result = bers_map(mu, z, grid, tol, detail=True)
        weight = z.imag ** 2
        value = abs(result.value) * weight
        worst_error = max(worst_error, result.error * weight)
        converged = converged and result.converged
        if argmax is None or value > best:
            best, argmax = value, z
    if not converged:
        logger.warning(f"B-norm of {mu.name}: Bers map quadrature not converged at every point")
    if detail:
        return SampledNorm(value=best, error=worst_error, converged=converged, argmax=argmax, points=len(points))
    return best
