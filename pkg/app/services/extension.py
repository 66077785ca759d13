"""Extension Service - averaging quasiconformal extensions, Beltrami coefficients, dilatation"""

import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from app.errors import DomainError, InvariantViolation
from app.models.differentials import TwoSidedBeltrami
from app.models.fields import Chart, FieldExtension, ScaleProfile, VectorField
from app.models.grids import HalfPlaneGrid
from app.models.maps import DilatationField, DiscExtension, Lift, LineMap, PlaneExtension
from app.services.circlemap import affine_conjugate, power_map

logger = logging.getLogger(__name__)

MODULE = "extension"

Points = Union[HalfPlaneGrid, Sequence[complex], np.ndarray]


def _averages(P, x: np.ndarray, y: np.ndarray, doubled: bool) -> Tuple[np.ndarray, np.ndarray]:
    """F = (P(x+y) - P(x-y)) / 2y and G = (P(x+y) - 2P(x) + P(x-y)) / y, halved when not doubled."""
    p_plus = P(x + y)
    p_minus = P(x - y)
    p_mid = P(x)
    F = (p_plus - p_minus) / (2.0 * y)
    G = (p_plus - 2.0 * p_mid + p_minus) / y
    if not doubled:
        G = 0.5 * G
    return F, G


def ba_extend(h: LineMap, doubled: bool = True) -> PlaneExtension:
    """
    Averaging extension H = F + iG of an increasing homeomorphism.

    F(x+iy) = (1/2y) ∫_{x-y}^{x+y} h and G(x+iy) = (1/y)(∫_x^{x+y} h - ∫_{x-y}^x h).
    The integrals come from h's primitive, which is exact for tables and for closed
    forms that carry one and is computed by vector quadrature otherwise.

    Args:
        h: Boundary map
        doubled: Use the doubled imaginary part (the un-doubled form sends the identity to x + iy/2)

    Returns:
        PlaneExtension with reflection H(z̄) = conj H(z)
    """
    P = h.primitive

    def evaluator(z):
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        if np.any(y <= 0):
            raise DomainError("averaging extension is evaluated on the open upper half-plane", module=MODULE)
        F, G = _averages(P, x, y, doubled)
        return F + 1j * G

    logger.debug(f"Built averaging extension of {h.name} (doubled={doubled})")
    return PlaneExtension(name=f"ba({h.name})", boundary=h, doubled=doubled, evaluator=evaluator)


def affine_stretch(K: float) -> PlaneExtension:
    """The extension x + iKy of the identity."""
    if K <= 0:
        raise DomainError(f"stretch factor must be positive, got {K}", module=MODULE)
    identity = power_map(1.0)
    return PlaneExtension(
        name=f"stretch({K:g})",
        boundary=identity,
        doubled=True,
        evaluator=lambda z: np.asarray(z).real + 1j * K * np.asarray(z).imag
    )


def disc_extension(h: LineMap, doubled: bool = True) -> DiscExtension:
    """Extension of a circle map to the disc, fixing 0, through the universal cover z -> e^{2πiz}."""
    if not h.is_circle:
        raise DomainError(f"map {h.name} is not a circle lift", module=MODULE)
    return DiscExtension(lift=ba_extend(h, doubled=doubled))


def _as_points(points: Points) -> np.ndarray:
    if isinstance(points, HalfPlaneGrid):
        return points.points()
    return np.asarray(points, dtype=complex)


def derivatives(H: PlaneExtension, z, step: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Wirtinger derivatives (H_z, H_z̄) by central differences with one Richardson step.

    Args:
        H: Extension
        z: Interior point(s)
        step: Difference step; defaults to Im z / 100 per node

    Returns:
        (H_z, H_z̄)
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise DomainError("derivatives are taken at interior points of the upper half-plane", module=MODULE)
    d = z.imag / 100.0 if step is None else np.full(z.shape, float(step))
    if np.any(d >= z.imag):
        raise DomainError("difference step must stay below the height of the node", module=MODULE)

    def partials(delta):
        hx = (H(z + delta) - H(z - delta)) / (2.0 * delta)
        hy = (H(z + 1j * delta) - H(z - 1j * delta)) / (2.0 * delta)
        return hx, hy

    hx1, hy1 = partials(d)
    hx2, hy2 = partials(0.5 * d)
    hx = (4.0 * hx2 - hx1) / 3.0
    hy = (4.0 * hy2 - hy1) / 3.0
    return 0.5 * (hx - 1j * hy), 0.5 * (hx + 1j * hy)


def local_dilatation(H: PlaneExtension, z, step: Optional[float] = None):
    """
    Local dilatation (|H_z| + |H_z̄|) / (|H_z| - |H_z̄|).

    Args:
        H: Extension
        z: Interior point(s)
        step: Difference step, default Im z / 100

    Returns:
        K_z >= 1 per point
    """
    hz, hzb = derivatives(H, z, step)
    a, b = np.abs(hz), np.abs(hzb)
    if np.any(a <= b):
        bad = np.atleast_1d(np.asarray(z))[np.atleast_1d(a <= b)][0]
        raise InvariantViolation(
            f"extension {H.name} is not orientation preserving at z = {complex(bad):.6g}",
            module=MODULE
        )
    k = (a + b) / (a - b)
    return float(k) if np.ndim(k) == 0 else k


def beltrami_of(H: PlaneExtension, points: Points, step: Optional[float] = None) -> DilatationField:
    """
    Beltrami coefficient μ = H_z̄ / H_z and local dilatation on every node.

    Args:
        H: Extension
        points: Grid or explicit interior nodes
        step: Difference step, default Im z / 100

    Returns:
        DilatationField
    """
    z = _as_points(points).ravel()
    hz, hzb = derivatives(H, z, step)
    if np.any(hz == 0):
        raise InvariantViolation(f"extension {H.name} is degenerate on the grid", module=MODULE)
    mu = hzb / hz
    size = np.abs(mu)
    if np.any(size >= 1):
        bad = z[size >= 1][0]
        raise InvariantViolation(
            f"|mu| >= 1 for {H.name} at node z = {bad.real:.6g}{bad.imag:+.6g}i",
            module=MODULE
        )
    k = (1.0 + size) / (1.0 - size)
    return DilatationField(name=H.name, z=z, mu=mu, k=k)


def max_dilatation(H: PlaneExtension, points: Points, step: Optional[float] = None) -> float:
    """
    Grid maximum of the local dilatation, a lower bound for the essential supremum K(H).
    """
    field = beltrami_of(H, points, step)
    k_max = field.k_max
    logger.info(f"K({H.name}) >= {k_max:.6g} on {field.z.size} nodes")
    return k_max


def extension_beltrami(H: PlaneExtension, step: Optional[float] = None) -> TwoSidedBeltrami:
    """Symmetric two-sided coefficient of an extension, evaluated lazily by differences."""

    def upper(z):
        hz, hzb = derivatives(H, z, step)
        return hzb / hz

    return TwoSidedBeltrami.symmetric(upper, name=f"mu[{H.name}]")


def asymptotic_profile(H: PlaneExtension, heights: Sequence[float], x_grid) -> ScaleProfile:
    """max over x of K_z - 1 on each horizontal line Im z = height."""
    xs = np.asarray(x_grid, dtype=float)
    values = []
    for y in heights:
        k = local_dilatation(H, xs + 1j * float(y))
        values.append(float(np.max(k) - 1.0))
    return ScaleProfile(scales=[float(y) for y in heights], values=values)


def naturality_defect(h: LineMap, a: Tuple[float, float], b: Tuple[float, float], points: Points,
                      doubled: bool = True) -> float:
    """
    sup |ex(A∘h∘B)(z) - A(ex(h)(B z))| over the points, for increasing real affine A and B.
    """
    z = _as_points(points)
    conj = ba_extend(affine_conjugate(h, a, b), doubled=doubled)
    base = ba_extend(h, doubled=doubled)
    bz = b[0] * z + b[1]
    lhs = conj(z)
    rhs = a[0] * base(bz) + a[1]
    return float(np.max(np.abs(lhs - rhs)))


def periodicity_defect(H: PlaneExtension, points: Points) -> float:
    """sup |H(z+1) - H(z) - 1| for extensions of circle lifts."""
    if H.boundary.lift != Lift.CIRCLE.value:
        raise DomainError(f"{H.name} does not extend a circle lift", module=MODULE)
    z = _as_points(points)
    return float(np.max(np.abs(H(z + 1.0) - H(z) - 1.0)))


def ba_extend_field(V: VectorField, doubled: bool = True) -> FieldExtension:
    """
    Averaging extension of a line-chart vector field with its exact ∂̄-derivative.

    With V± = V(x±y), V0 = V(x) and c = 1 (doubled) or 1/2:
        2 ∂̄Ṽ = [(V+ - V-)/2 - c(V+ - V-) + G] / y
               + i [c(V+ - 2V0 + V-) + (V+ + V-)/2 - F] / y

    Args:
        V: Field on the line; its primitive is used when available
        doubled: Use the doubled imaginary part

    Returns:
        FieldExtension carrying Ṽ and ∂̄Ṽ
    """
    if V.chart != Chart.LINE.value:
        raise DomainError(f"field {V.name} must be given in the line chart", module=MODULE)
    P = V.primitive()
    c = 1.0 if doubled else 0.5

    def split(z):
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        if np.any(y <= 0):
            raise DomainError("field extension is evaluated on the open upper half-plane", module=MODULE)
        return x, y

    def evaluator(z):
        x, y = split(z)
        F, G = _averages(P, x, y, doubled)
        return F + 1j * G

    def dbar(z):
        x, y = split(z)
        F, G = _averages(P, x, y, doubled)
        v_plus, v_minus, v_mid = V(x + y), V(x - y), V(x)
        real = (0.5 * (v_plus - v_minus) - c * (v_plus - v_minus) + G) / y
        imag = (c * (v_plus - 2.0 * v_mid + v_minus) + 0.5 * (v_plus + v_minus) - F) / y
        return 0.5 * (real + 1j * imag)

    return FieldExtension(field=V, doubled=doubled, evaluator=evaluator, dbar=dbar)
