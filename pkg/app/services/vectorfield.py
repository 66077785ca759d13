"""Vector Field Service - Zygmund seminorms, cross ratios, chart transport, quadratic quotient"""

import logging
import math
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np

from app.errors import DomainError
from app.models.fields import Chart, FieldKind, Quadruple, ScaleProfile, VectorField
from app.services.numerics import second_difference

logger = logging.getLogger(__name__)

MODULE = "vectorfield"

QuadrupleLike = Union[Quadruple, Sequence[complex]]


def _points(Q: QuadrupleLike):
    if isinstance(Q, Quadruple):
        return Q.points()
    if len(Q) != 4:
        raise DomainError(f"a quadruple has four points, got {len(Q)}", module=MODULE)
    return [complex(p) for p in Q]


def _check_distinct(points) -> None:
    finite = [p for p in points if np.isfinite(p)]
    for i, p in enumerate(finite):
        for q in finite[i + 1:]:
            if p == q:
                raise DomainError(f"quadruple has coincident points at {p}", module=MODULE)
    if len(finite) < 3:
        raise DomainError("at most one point of a quadruple may be at infinity", module=MODULE)


def _simplify(value: complex):
    return value.real if value.imag == 0 else value


def cross_ratio(Q: QuadrupleLike):
    """
    Cross ratio (d-c)(b-a) / ((c-b)(a-d)).

    A point at infinity is accepted in first position and read as a limit, which
    gives -(d-c)/(c-b).

    Args:
        Q: Quadruple model or four points

    Returns:
        Real value for real points, complex otherwise
    """
    a, b, c, d = _points(Q)
    _check_distinct([a, b, c, d])
    if not np.isfinite(a):
        return _simplify(complex(-(d - c) / (c - b)))
    if not all(np.isfinite(p) for p in (b, c, d)):
        raise DomainError("only the first point of a quadruple may be at infinity", module=MODULE)
    return _simplify(complex((d - c) * (b - a) / ((c - b) * (a - d))))


def mobius(coefficients: Sequence[complex], z):
    """(a z + b) / (c z + d) for coefficients (a, b, c, d)."""
    a, b, c, d = coefficients
    z = np.asarray(z, dtype=complex)
    return (a * z + b) / (c * z + d)


def alternating_sum(W: Callable, Q: QuadrupleLike) -> float:
    """
    W[a,b,c,d] = Δ(d,c) - Δ(c,b) + Δ(b,a) - Δ(a,d) with Δ(p,q) = (W(p) - W(q)) / (p - q).

    With a = -inf the two difference quotients through a vanish, leaving
    (W(x+t) - 2W(x) + W(x-t)) / t on (-inf, x-t, x, x+t). The sign is the one the
    four-term formula gives: Δ(d,c) - Δ(c,b) is +Δ²W / t, not its negative. The
    seminorms built on this sum take absolute values, so either sign gives the same norms.

    Args:
        W: Field on the line
        Q: Quadruple

    Returns:
        The alternating sum (zero for quadratic polynomials)
    """
    a, b, c, d = _points(Q)
    _check_distinct([a, b, c, d])

    def quotient(p, q):
        return (W(p) - W(q)) / (p - q)

    total = quotient(d, c) - quotient(c, b)
    if np.isfinite(a):
        total = total + quotient(b, a) - quotient(a, d)
    total = complex(total)
    return _simplify(total)


def _grid_quotients(V: Callable, x_grid, t_grid) -> np.ndarray:
    x = np.asarray(x_grid, dtype=float)
    t = np.asarray(t_grid, dtype=float)
    if x.size == 0 or t.size == 0:
        raise DomainError("seminorm grids must be nonempty", module=MODULE)
    X, T = np.meshgrid(x, t)
    return np.abs(second_difference(V, X, T)) / T


def zygmund_seminorm(V: Callable, x_grid, t_grid) -> float:
    """
    Grid maximum of |V(x+t) - 2V(x) + V(x-t)| / t.

    Args:
        V: Field (any chart with real values) or callable
        x_grid: Base points
        t_grid: Positive steps

    Returns:
        Lower bound of the Zygmund seminorm
    """
    return float(np.max(_grid_quotients(V, x_grid, t_grid)))


def little_zygmund_profile(V: Callable, scales, x_grid) -> ScaleProfile:
    """
    Per-scale supremum of |Δ²V| / t; a profile tending to zero marks V as little-Zygmund.
    """
    scales = [float(t) for t in scales]
    values = _grid_quotients(V, x_grid, scales).max(axis=1)
    return ScaleProfile(scales=scales, values=[float(v) for v in values])


def crossratio_seminorm(V: Callable, x_grid, t_grid, kappa: float = 1.0) -> float:
    """
    Cross-ratio seminorm restricted to the normalised quadruples (-inf, x-t, x, x+t).

    On that family the cross ratio is -1 and the density weight is the constant kappa,
    so the value is kappa * max |cr(Q) W[Q]|.

    Args:
        V: Field in the line chart
        x_grid: Centre points
        t_grid: Half-widths
        kappa: Density weight at cross ratio -1

    Returns:
        Seminorm value
    """
    if kappa <= 0:
        raise DomainError(f"kappa must be positive, got {kappa}", module=MODULE)
    if isinstance(V, VectorField) and V.chart != Chart.LINE.value:
        raise DomainError(f"field {V.name} must be transported to the line chart first", module=MODULE)
    cr = cross_ratio((-math.inf, -1.0, 0.0, 1.0))
    # W[Q] on the normalised family is the scaled second difference
    return float(kappa * abs(cr) * np.max(_grid_quotients(V, x_grid, t_grid)))


def stereographic(z):
    """u = (z + i) / (iz + 1); sends 1, i, -1, -i to 1, ∞, -1, 0."""
    z = np.asarray(z, dtype=complex)
    den = 1j * z + 1.0
    at_pole = np.abs(den) < 1e-14
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(at_pole, complex(np.inf, 0.0), (z + 1j) / np.where(at_pole, 1.0, den))
    return complex(u) if u.ndim == 0 else u


def inverse_stereographic(u):
    """z = (u - i) / (1 - iu), the point of the unit circle with chart value u."""
    u = np.asarray(u, dtype=complex)
    z = (u - 1j) / (1.0 - 1j * u)
    return complex(z) if z.ndim == 0 else z


def _excluded(values, label: str) -> None:
    if not np.all(np.isfinite(values)):
        raise DomainError(f"{label} is the excluded point z = i of the line chart", module=MODULE)


def _angle_to_circle(V: Callable) -> Callable:
    def evaluator(z):
        z = np.asarray(z, dtype=complex)
        return 1j * np.asarray(V(np.angle(z))) * z
    return evaluator


def _circle_to_angle(Vt: Callable) -> Callable:
    def evaluator(x):
        z = np.exp(1j * np.asarray(x, dtype=float))
        return np.real(Vt(z) / (1j * z))
    return evaluator


def _circle_to_line(Vt: Callable) -> Callable:
    def evaluator(u):
        u = np.asarray(u, dtype=float)
        z = inverse_stereographic(u)
        return np.real(Vt(z) * (1.0 - 1j * u) ** 2 / 2.0)
    return evaluator


def _line_to_circle(Vh: Callable) -> Callable:
    def evaluator(z):
        u = stereographic(z)
        _excluded(u, "transport target")
        u = np.real(u)
        return np.asarray(Vh(u)) * 2.0 / (1.0 - 1j * u) ** 2
    return evaluator


def transport(V: VectorField, target: Chart) -> VectorField:
    """
    Express a field in another chart.

    Angle and circle charts are related by Ṽ(e^{ix}) = i V(x) e^{ix}; circle and line
    charts by u = (z+i)/(iz+1) with the cocycle (1 - iu)² / 2 = dU/dz.

    Args:
        V: Field in its own chart
        target: Chart to express it in

    Returns:
        Closed-form field in the target chart
    """
    source = Chart(V.chart)
    target = Chart(target)
    if source == target:
        return V
    to_circle = {
        Chart.ANGLE: lambda f: _angle_to_circle(f),
        Chart.LINE: lambda f: _line_to_circle(f),
        Chart.CIRCLE: lambda f: f,
    }
    from_circle = {
        Chart.ANGLE: lambda f: _circle_to_angle(f),
        Chart.LINE: lambda f: _circle_to_line(f),
        Chart.CIRCLE: lambda f: f,
    }
    evaluator = from_circle[target](to_circle[source](V))
    growth = "O(|u|^2)" if target == Chart.LINE else None
    return VectorField.closed_form(evaluator, chart=target, name=f"{V.name}@{target.value}", growth=growth)


def project_out_quadratics(V: VectorField, points: Optional[Sequence[float]] = None,
                           far: float = 1e4, quadratic_tol: float = 1e-11) -> VectorField:
    """
    Representative of V modulo quadratic polynomials vanishing at the normalisation points.

    By default the quadratic q matches V at 0 and 1 and carries V's quadratic growth,
    read off as (V(L) + V(-L) - 2V(0)) / 2L² at L = far; three finite points give the
    interpolating quadratic instead.

    Args:
        V: Field in the line chart
        points: Three finite normalisation points, or None for (0, 1, ∞)
        far: Distance used to read the growth at infinity
        quadratic_tol: Relative residual below which V counts as quadratic; the result is then
            the exact zero field, so Möbius fields such as degree-one trigonometric fields
            do not leave round-off for later quadratures

    Returns:
        V - q, with primitive adjusted when V carries one
    """
    if V.chart != Chart.LINE.value:
        raise DomainError(f"field {V.name} must be in the line chart", module=MODULE)
    if points is None:
        v0 = float(V(np.asarray(0.0)))
        v1 = float(V(np.asarray(1.0)))
        alpha = float((V(np.asarray(far)) + V(np.asarray(-far)) - 2.0 * v0) / (2.0 * far * far))
        beta = v1 - v0 - alpha
        gamma = v0
    else:
        p = np.asarray(points, dtype=float)
        if p.size != 3 or len(set(p.tolist())) != 3:
            raise DomainError("normalisation needs three distinct points", module=MODULE)
        alpha, beta, gamma = np.polyfit(p, np.asarray(V(p), dtype=float), 2)

    func = V.func if V.kind == FieldKind.CLOSED_FORM.value else V

    u = np.linspace(-10.0, 10.0, 41)
    q = alpha * u * u + beta * u + gamma
    values = np.asarray(func(u), dtype=float)
    reference = float(np.max(np.abs(values) + np.abs(q)))
    if float(np.max(np.abs(values - q))) <= quadratic_tol * reference:
        logger.debug(f"{V.name} is quadratic to round-off, projected to zero")

        def zero(u):
            return np.zeros_like(np.asarray(u, dtype=float))

        return VectorField.closed_form(zero, chart=Chart.LINE, antiderivative=zero,
                                       name=f"[{V.name}]", growth=V.growth)

    def projected(u):
        u = np.asarray(u, dtype=float)
        return func(u) - (alpha * u * u + beta * u + gamma)

    primitive = None
    if V.antiderivative is not None:
        P = V.antiderivative

        def primitive(u):
            u = np.asarray(u, dtype=float)
            return P(u) - (alpha * u ** 3 / 3.0 + beta * u * u / 2.0 + gamma * u)

    logger.debug(f"Projected {V.name}: q = {alpha:.6g} u^2 + {beta:.6g} u + {gamma:.6g}")
    return VectorField.closed_form(projected, chart=Chart.LINE, antiderivative=primitive,
                                   name=f"[{V.name}]", growth=V.growth)


def complex_coefficients(V: VectorField) -> Dict[int, complex]:
    """
    Coefficients c_k of Ṽ(z) = i V(x) z = Σ c_k z^k.

    c_1 = i a0, c_{k+1} = (b_k + i a_k) / 2 and c_{1-k} = (i a_k - b_k) / 2, so that
    c_{2-k} = -conj(c_k).
    """
    trig = V.to_trig()
    coeffs: Dict[int, complex] = {1: complex(0.0, trig.a0)}
    for k, (ak, bk) in enumerate(zip(trig.a, trig.b), start=1):
        coeffs[k + 1] = complex(bk, ak) / 2.0
        coeffs[1 - k] = complex(-bk, ak) / 2.0
    return dict(sorted(coeffs.items()))


def from_complex_coefficients(coeffs: Dict[int, complex], tol: float = 1e-12,
                              name: str = "trig") -> VectorField:
    """
    Real trigonometric field from complex coefficients, a_k = 2 Im c_{k+1}, b_k = 2 Re c_{k+1}.

    Raises DomainError when the reality relation c_{2-k} = -conj(c_k) fails.
    """
    coeffs = {int(k): complex(v) for k, v in coeffs.items()}
    scale = max([1.0] + [abs(v) for v in coeffs.values()])
    for k, ck in coeffs.items():
        partner = coeffs.get(2 - k, 0j)
        if abs(partner + ck.conjugate()) > tol * scale:
            raise DomainError(f"coefficients violate c_(2-k) = -conj(c_k) at k = {k}", module=MODULE)
    top = max([k for k in coeffs if k >= 2], default=1)
    a = [2.0 * coeffs.get(k + 1, 0j).imag for k in range(1, top)]
    b = [2.0 * coeffs.get(k + 1, 0j).real for k in range(1, top)]
    return VectorField.trig(coeffs.get(1, 0j).imag, a, b, name=name)
