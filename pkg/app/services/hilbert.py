"""Hilbert Transform Service - J on circle vector fields by principal value, Fourier and Beltrami routes"""

import logging
import math
from typing import Optional, Sequence

import numpy as np

from app.errors import DomainError
from app.models.differentials import Symmetry, TwoSidedBeltrami
from app.models.fields import Chart, FieldSamples, VectorField
from app.models.grids import HalfPlaneGrid, Tolerance
from app.models.reports import RouteAgreement
from app.services.extension import ba_extend_field
from app.services.numerics import pv_circle_integral
from app.services.quaddiff import v_mu
from app.services.vectorfield import project_out_quadratics, transport

logger = logging.getLogger(__name__)

MODULE = "hilbert"

PV_NODES = 2 ** 14


def _cot_half(s):
    return np.cos(0.5 * s) / np.sin(0.5 * s)


def _pv_alternating(V, xs: np.ndarray, nodes: int) -> np.ndarray:
    """
    Alternate-point rule for PV∫ V(y) cot((y-x)/2) dy: only nodes at odd offsets from x
    are used, each with weight 4π/N. Exact on trigonometric polynomials of degree < N/2.
    """
    h = 2.0 * math.pi / nodes
    offsets = h * np.arange(1, nodes, 2)
    weights = _cot_half(offsets)
    values = np.empty(xs.size)
    for i, x in enumerate(xs):
        values[i] = np.dot(np.asarray(V(x + offsets), dtype=float), weights)
    return 2.0 * h * values


def hilbert_pv(V: VectorField, x_grid: Sequence[float], tol: Optional[Tolerance] = None,
               method: str = "nodes", nodes: int = PV_NODES) -> FieldSamples:
    """
    W(x) = (1/2π) PV∫ V(y) cot((y-x)/2) dy on the given angles.

    The kernel has zero mean, so the output is already the mean-zero representative
    of J V modulo constants.

    Args:
        V: Continuous periodic field in the angle chart
        x_grid: Sample angles
        tol: Excision tolerance for the adaptive route
        method: "nodes" (alternate-point rule on a fixed node count) or "adaptive"
            (symmetric ε-excision with geometric shrinking)
        nodes: Even node count for the "nodes" route

    Returns:
        FieldSamples on x_grid
    """
    if V.chart != Chart.ANGLE.value:
        raise DomainError(f"field {V.name} must be in the angle chart", module=MODULE)
    xs = np.asarray(x_grid, dtype=float).ravel()

    if method == "nodes":
        if nodes < 4 or nodes % 2:
            raise DomainError(f"node count must be even and at least 4, got {nodes}", module=MODULE)
        values = _pv_alternating(V, xs, nodes) / (2.0 * math.pi)
    elif method == "adaptive":
        values = np.array([
            pv_circle_integral(lambda y, x=x: np.asarray(V(y)) * _cot_half(y - x), x, tol)
            for x in xs
        ]) / (2.0 * math.pi)
    else:
        raise DomainError(f"unknown principal value method {method!r}", module=MODULE)

    logger.debug(f"Hilbert transform of {V.name} on {xs.size} angles ({method})")
    return FieldSamples(name=f"J({V.name})", chart=Chart.ANGLE, x=xs.tolist(), values=values.tolist())


def hilbert_fourier(V: VectorField) -> VectorField:
    """(a_k, b_k) -> (b_k, -a_k) for k >= 1 and a0 -> 0."""
    trig = V.to_trig()
    return VectorField.trig(0.0, list(trig.b), [-v for v in trig.a], name=f"J({V.name})")


def rotate_coefficient(mu: TwoSidedBeltrami) -> TwoSidedBeltrami:
    """μ̂ = iμ on the upper half-plane and -iμ on the lower one; |μ̂| = |μ| pointwise."""
    upper, lower = mu.upper, mu.lower
    return TwoSidedBeltrami(
        name=f"rot({mu.name})",
        upper=lambda z: 1j * upper(z),
        lower=lambda z: -1j * lower(z),
        symmetry=mu.symmetry,
        sup_bound=mu.sup_bound
    )


def hilbert_via_beltrami(mu: TwoSidedBeltrami, x_grid: Sequence[float], grid: Optional[HalfPlaneGrid] = None,
                         tol: Optional[Tolerance] = None, probe: Optional[Sequence[complex]] = None,
                         symmetry_tol: float = 1e-12) -> FieldSamples:
    """
    J V_μ on the line through the rotated coefficient: returns -V_{μ̂} on x_grid.

    V_{μ̂} restricted to the line is the harmonic conjugate of V_μ; the sign flip makes
    this route agree with hilbert_fourier and hilbert_pv modulo quadratic polynomials.

    Args:
        mu: Symmetric two-sided coefficient
        x_grid: Real evaluation points (not 0 or 1)
        grid: Quadrature grid for the representation integral
        tol: Quadrature tolerance
        probe: Points used to verify the symmetry of coefficients not tagged symmetric
        symmetry_tol: Allowed symmetry defect on the probe points

    Returns:
        FieldSamples in the line chart
    """
    if mu.symmetry != Symmetry.SYMMETRIC.value:
        if probe is None:
            raise DomainError(f"coefficient {mu.name} is not tagged symmetric", module=MODULE)
        defect = mu.symmetry_defect(probe)
        if defect > symmetry_tol:
            raise DomainError(
                f"coefficient {mu.name} is not symmetric: defect {defect:.3g} on the probe points",
                module=MODULE
            )

    rotated = rotate_coefficient(mu)
    xs = np.asarray(x_grid, dtype=float).ravel()
    grid = grid or HalfPlaneGrid()
    values = []
    errors = []
    converged = True
    for x in xs:
        result = v_mu(rotated, complex(x), grid, tol, detail=True)
        values.append(-result.value.real)
        errors.append(result.error)
        converged = converged and result.converged
    error = max(errors, default=0.0)
    if not converged:
        logger.warning(f"Hilbert transform of V[{mu.name}] through the rotated coefficient not converged "
                       f"(largest error {error:.3e})")
    logger.info(f"Hilbert transform of V[{mu.name}] through the rotated coefficient on {xs.size} points")
    return FieldSamples(name=f"J(V[{mu.name}])", chart=Chart.LINE, x=xs.tolist(), values=values,
                        error=error, converged=converged)


def field_coefficient(V: VectorField, grid: HalfPlaneGrid, doubled: bool = True) -> TwoSidedBeltrami:
    """
    Symmetric ∂̄ of the averaging extension of V's normalised line-chart representative.

    The sup bound is sampled on the base nodes of grid; it feeds the tail estimate of
    the representation integral.
    """
    line = V if V.chart == Chart.LINE.value else transport(V, Chart.LINE)
    dbar = ba_extend_field(project_out_quadratics(line), doubled).dbar
    bound = float(np.max(np.abs(dbar(grid.points())), initial=0.0))
    return TwoSidedBeltrami.symmetric(dbar, name=f"dbar[{V.name}]", sup_bound=bound)


def beltrami_agreement(V: VectorField, points: Sequence[float], grid: Optional[HalfPlaneGrid] = None,
                       tol: Optional[Tolerance] = None, fourier: Optional[VectorField] = None) -> RouteAgreement:
    """
    Compare -V_{μ̂} for μ = ∂̄ of V's averaging extension with the Fourier route, modulo quadratics.

    Args:
        V: Field in the angle chart
        points: At least four line-chart points, none of them 0 or 1
        grid: Quadrature grid for the representation integral
        tol: Quadrature tolerance
        fourier: Precomputed Fourier-route transform of V in the angle chart

    Returns:
        RouteAgreement with the residual of the difference after a quadratic fit
    """
    if V.chart != Chart.ANGLE.value:
        raise DomainError(f"field {V.name} must be in the angle chart", module=MODULE)
    u = np.asarray(points, dtype=float).ravel()
    if u.size < 4:
        raise DomainError(f"a quadratic fit needs at least four points, got {u.size}", module=MODULE)
    if np.any((u == 0.0) | (u == 1.0)):
        raise DomainError("V is normalised to vanish at 0 and 1; choose other points", module=MODULE)

    grid = grid or HalfPlaneGrid()
    samples = hilbert_via_beltrami(field_coefficient(V, grid), u, grid, tol)
    reference = transport(fourier or hilbert_fourier(V), Chart.LINE)
    expected = np.asarray(reference(u), dtype=float)
    difference = samples.as_array() - expected
    quadratic = np.polyfit(u, difference, 2)
    residual = float(np.max(np.abs(difference - np.polyval(quadratic, u))))
    logger.info(f"Beltrami route for {V.name}: residual {residual:.3e} modulo quadratics")
    return RouteAgreement(
        field=V.name,
        points=u.tolist(),
        neg_v_mu_hat=samples.values,
        fourier=expected.tolist(),
        quadratic=quadratic.tolist(),
        residual=residual,
        error=samples.error,
        converged=samples.converged
    )
