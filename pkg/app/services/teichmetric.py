"""Teichmüller Metric Service - distance brackets and the infinitesimal norm"""

import logging
import math
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from app.errors import DomainError
from app.models.differentials import RationalQD, TwoSidedBeltrami
from app.models.grids import HalfPlaneGrid, Tolerance
from app.models.maps import LineMap
from app.models.reports import BracketRecord, NormBracket, StrebelRatio
from app.services.extension import ba_extend, extension_beltrami, max_dilatation
from app.services.numerics import integrate_halfplane

logger = logging.getLogger(__name__)

MODULE = "teichmetric"

Coefficient = Union[TwoSidedBeltrami, Callable]


def _upper(mu: Coefficient) -> Callable:
    return mu.upper if isinstance(mu, TwoSidedBeltrami) else mu


def _scaled(mu: Coefficient, t: float) -> Callable:
    upper = _upper(mu)
    return lambda z: t * upper(z)


def distance_upper(h: LineMap, points, step: Optional[float] = None) -> float:
    """
    ½ log K of the averaging extension sampled on the given nodes.

    K₀(h) is an infimum over all extensions, so this is an upper bound for the
    Teichmüller distance from h to the identity class (up to the grid sampling of K).
    """
    k = max_dilatation(ba_extend(h), points, step)
    return 0.5 * math.log(k)


def strebel_ratios(mu: Coefficient, phi_list: Sequence[RationalQD], grid: Optional[HalfPlaneGrid] = None,
                   tol: Optional[Tolerance] = None) -> List[StrebelRatio]:
    """
    Both Reich–Strebel integrals of μ against each φ, normalised by ‖φ‖ on the same nodes.

    The (f2) integrand for φ is the (f1) integrand for -φ, so one stacked quadrature
    per differential serves both functionals.

    Args:
        mu: Coefficient with |μ| < 1 on the upper half-plane
        phi_list: Integrable differentials (any normalisation)
        grid: Base grid, refined toward the poles of each φ
        tol: Quadrature tolerance

    Returns:
        One StrebelRatio per differential
    """
    upper = _upper(mu)
    grid = grid or HalfPlaneGrid()
    ratios = []
    for phi in phi_list:
        if phi.is_zero:
            raise DomainError(f"differential {phi.name} is zero and cannot be normalised", module=MODULE)

        def integrand(z, phi=phi):
            m = np.asarray(upper(z), dtype=complex)
            size = np.abs(m)
            if np.any(size >= 1):
                bad = z[size >= 1][0]
                raise DomainError(
                    f"|mu| >= 1 at z = {bad.real:.6g}{bad.imag:+.6g}i; Reich–Strebel integrals need |mu| < 1",
                    module=MODULE
                )
            f = phi(z)
            a = np.abs(f)
            unit = np.divide(f, a, out=np.zeros_like(f), where=a > 0)
            weight = a / (1.0 - size * size)
            return np.vstack([
                a,
                np.abs(1.0 - m * unit) ** 2 * weight,
                np.abs(1.0 + m * unit) ** 2 * weight,
            ])

        result = integrate_halfplane(integrand, grid.with_focus([(p, 0.0) for p in phi.poles]), tol)
        norm, lower, upper_value = (c.real for c in result.components)
        ratios.append(StrebelRatio(
            phi=phi.name,
            norm=norm,
            lower_integral=lower / norm,
            upper_integral=upper_value / norm,
            error=result.error / norm,
            converged=result.converged
        ))
    return ratios


def _lower_from_ratios(ratios: Sequence[StrebelRatio]) -> float:
    best = 0.0
    for r in ratios:
        smallest = min(r.lower_integral, r.upper_integral)
        best = max(best, 0.5 * math.log(1.0 / smallest))
    return best


def reich_strebel_lower(mu: Coefficient, phi_list: Sequence[RationalQD], grid: Optional[HalfPlaneGrid] = None,
                        tol: Optional[Tolerance] = None) -> float:
    """
    Lower bound max(0, max_φ ½ log(1/I(φ))) on the Teichmüller distance.

    I(φ) is the (f1) integral of the unit differential φ/‖φ‖. The list is closed under
    φ -> -φ, whose (f1) integral is the (f2) integral of φ, so both signs contribute.

    Args:
        mu: Beltrami coefficient of some quasiconformal extension of the boundary map
        phi_list: Integrable differentials
        grid: Base grid
        tol: Quadrature tolerance

    Returns:
        d_lower >= 0
    """
    return _lower_from_ratios(strebel_ratios(mu, phi_list, grid, tol))


def reich_strebel_upper_functional(mu: Coefficient, phi_list: Sequence[RationalQD],
                                   grid: Optional[HalfPlaneGrid] = None, tol: Optional[Tolerance] = None) -> float:
    """
    max over the list of the (f2) integral of φ/‖φ‖.

    The (f2) bound on K₀ is a supremum over all unit differentials; a finite list only
    bounds that supremum from below, so this value is an estimate, not a certified bound.
    """
    ratios = strebel_ratios(mu, phi_list, grid, tol)
    return max((r.upper_integral for r in ratios), default=1.0)


def _normalized_pairings(mu: Coefficient, phi_list: Sequence[RationalQD], grid: HalfPlaneGrid,
                         tol: Optional[Tolerance]) -> List[complex]:
    """∫∫ μφ / ‖φ‖ per differential, both integrals on the same nodes."""
    upper = _upper(mu)
    values = []
    for phi in phi_list:
        if phi.is_zero:
            raise DomainError(f"differential {phi.name} is zero and cannot be normalised", module=MODULE)

        def integrand(z, phi=phi):
            f = phi(z)
            return np.vstack([np.asarray(upper(z), dtype=complex) * f, np.abs(f).astype(complex)])

        result = integrate_halfplane(integrand, grid.with_focus([(p, 0.0) for p in phi.poles]), tol)
        pairing, norm = result.components
        values.append(pairing / norm.real)
    return values


def infinitesimal_norm(mu: Coefficient, phi_list: Sequence[RationalQD], grid: Optional[HalfPlaneGrid] = None,
                       tol: Optional[Tolerance] = None, phases: Optional[int] = None,
                       sup_points=None) -> NormBracket:
    """
    Infinitesimal Teichmüller norm bracket of a Beltrami tangent vector.

    Args:
        mu: Tangent coefficient
        phi_list: Integrable differentials (normalised internally)
        grid: Base grid
        tol: Quadrature tolerance
        phases: Number of equally spaced phases e^{iθ}φ swept per differential; None takes
            the supremum over all phases, |∫∫ μφ| / ‖φ‖
        sup_points: Points used to sample ‖μ‖∞ when μ carries no declared bound

    Returns:
        NormBracket(lower, upper) with lower <= upper
    """
    grid = grid or HalfPlaneGrid()
    pairings = _normalized_pairings(mu, phi_list, grid, tol)
    if phases is None:
        moduli = [abs(c) for c in pairings]
    else:
        if phases < 1:
            raise DomainError(f"phase count must be positive, got {phases}", module=MODULE)
        rotations = np.exp(2j * math.pi * np.arange(phases) / phases)
        moduli = [float(np.max(np.abs((rotations * c).real))) for c in pairings]

    if isinstance(mu, TwoSidedBeltrami) and mu.sup_bound is not None:
        upper = mu.sup_bound
    else:
        points = grid.points() if sup_points is None else np.asarray(sup_points, dtype=complex)
        upper = float(np.max(np.abs(_upper(mu)(points)), initial=0.0))

    lower = max(moduli, default=0.0)
    logger.debug(f"Infinitesimal norm bracket [{lower:.6g}, {upper:.6g}] over {len(pairings)} differentials")
    return NormBracket(lower=float(lower), upper=float(upper), pairings=[float(m) for m in moduli])


def first_variation_slope(mu: Coefficient, phi_list: Sequence[RationalQD], ts: Sequence[float],
                          grid: Optional[HalfPlaneGrid] = None, tol: Optional[Tolerance] = None) -> float:
    """
    Slope at t = 0 of the Reich–Strebel lower bound along the ray tμ.

    The signed bound max_φ ½ log(1/I_t(φ)) is fitted by a quadratic in t; its linear
    coefficient approximates max_φ |Re ∫∫ μφ| / ‖φ‖.
    """
    ts = [float(t) for t in ts]
    if len(ts) < 3:
        raise DomainError("slope regression needs at least three values of t", module=MODULE)
    if any(t <= 0 for t in ts):
        raise DomainError("variation parameters must be positive", module=MODULE)
    if max(ts) * (mu.sup_bound if isinstance(mu, TwoSidedBeltrami) and mu.sup_bound is not None else 0.0) >= 1:
        raise DomainError("t·‖μ‖∞ must stay below 1", module=MODULE)

    bounds = []
    for t in ts:
        ratios = strebel_ratios(_scaled(mu, t), phi_list, grid, tol)
        bounds.append(max(0.5 * math.log(1.0 / min(r.lower_integral, r.upper_integral)) for r in ratios))
    coeffs = np.polyfit(ts, bounds, 2)
    slope = float(coeffs[1])
    logger.info(f"First variation slope {slope:.6g} from t in [{min(ts):g}, {max(ts):g}]")
    return slope


def bracket(h: LineMap, phi_list: Sequence[RationalQD], points, grid: Optional[HalfPlaneGrid] = None,
            tol: Optional[Tolerance] = None, map_id: Optional[str] = None,
            step: Optional[float] = None) -> BracketRecord:
    """
    Distance bracket for one map: K(BA) and d_upper from the sampled extension dilatation,
    d_lower from the Reich–Strebel functionals of the same extension.

    Args:
        h: Boundary map normalised to fix 0, 1 and ∞
        phi_list: Differentials for the lower bound
        points: Nodes for the dilatation maximum
        grid: Quadrature grid for the lower bound
        tol: Quadrature tolerance
        map_id: Identifier for the record (defaults to the map name)
        step: Difference step for derivatives

    Returns:
        BracketRecord
    """
    try:
        H = ba_extend(h)
        k_ba = max_dilatation(H, points, step)
        d_upper = 0.5 * math.log(k_ba)
        ratios = strebel_ratios(extension_beltrami(H, step), phi_list, grid, tol)
        d_lower = _lower_from_ratios(ratios)
    except Exception as e:
        logger.error(f"Error bracketing distance for {h.name}: {e}", exc_info=True)
        raise

    if d_lower > d_upper:
        logger.warning(f"Bracket for {h.name} is inverted: lower {d_lower:.6g} > upper {d_upper:.6g}")
    logger.info(f"Distance bracket for {h.name}: [{d_lower:.6g}, {d_upper:.6g}]")
    return BracketRecord(
        map_id=map_id or h.name,
        k_ba=k_ba,
        d_upper=d_upper,
        d_lower=d_lower,
        gap=d_upper - d_lower,
        ratios=ratios
    )
