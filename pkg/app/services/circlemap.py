"""Circle Map Service - quasisymmetry measurement, conjugacies and the map pseudo-group"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.errors import DomainError, InvariantViolation
from app.models.maps import (
    HolderCheck,
    Lift,
    LineMap,
    MapKind,
    NeighborhoodSearch,
    PowerLawSystem,
    QsEstimate,
    RatioDistortionProfile,
)

logger = logging.getLogger(__name__)

MODULE = "circlemap"

# half a period of the lift is π in angle coordinates
CIRCLE_T_LIMIT = 0.25


def _ratios(h: LineMap, x, t) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    centre = h(x)
    forward = h(x + t) - centre
    backward = centre - h(x - t)
    bad = (forward <= 0) | (backward <= 0)
    if np.any(bad):
        where = np.atleast_1d(bad)
        xs, ts = np.broadcast_arrays(x, t)
        xb = float(np.atleast_1d(xs)[where][0])
        tb = float(np.atleast_1d(ts)[where][0])
        raise InvariantViolation(
            f"map {h.name} is not increasing around x = {xb:.6g}, t = {tb:.6g}",
            module=MODULE
        )
    return forward / backward


def qs_ratio(h: LineMap, x: float, t: float) -> float:
    """
    Symmetric ratio (h(x+t) - h(x)) / (h(x) - h(x-t)).

    Args:
        h: Boundary map
        x: Centre point
        t: Half-width, strictly positive

    Returns:
        Strictly positive ratio
    """
    if np.any(np.asarray(t) <= 0):
        raise DomainError(f"ratio half-width must be positive, got {t}", module=MODULE)
    ratio = _ratios(h, x, t)
    return float(ratio) if np.ndim(ratio) == 0 else ratio


def _admissible_scales(h: LineMap, t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    t = t[t > 0]
    if h.is_circle:
        dropped = int(np.sum(t >= CIRCLE_T_LIMIT))
        if dropped:
            logger.debug(f"Dropping {dropped} scales beyond a quarter period for circle map {h.name}")
        t = t[t < CIRCLE_T_LIMIT]
    return t


def qs_constant(h: LineMap, x_grid, t_grid) -> float:
    """
    Grid maximum of max(ratio, 1/ratio), a lower bound for the quasisymmetry constant.

    Args:
        h: Boundary map
        x_grid: Centre points
        t_grid: Half-widths; for circle lifts only t < 1/4 (|t| < π/2 in angle) is used

    Returns:
        M >= 1
    """
    x = np.asarray(x_grid, dtype=float)
    t = _admissible_scales(h, t_grid)
    if x.size == 0 or t.size == 0:
        raise DomainError("quasisymmetry grids must be nonempty", module=MODULE)
    X, T = np.meshgrid(x, t)
    ratio = _ratios(h, X, T)
    return float(max(1.0, np.max(np.maximum(ratio, 1.0 / ratio))))


def qs_estimate(h: LineMap, x_range: Tuple[float, float], t_range: Tuple[float, float],
                levels: int = 4, base: int = 32, rel_tol: float = 1e-3) -> QsEstimate:
    """Quasisymmetry constant on log-spaced scales and uniform centres, doubling both grids per level."""
    values: List[float] = []
    for level in range(levels):
        count = base * 2 ** level
        xs = np.linspace(x_range[0], x_range[1], count + 1)
        ts = np.geomspace(t_range[1], t_range[0], count)
        values.append(qs_constant(h, xs, ts))
    converged = len(values) > 1 and abs(values[-1] - values[-2]) <= rel_tol * values[-1]
    return QsEstimate(lower_bound=max(values), levels=values, converged=converged)


def invert(h: LineMap, nodes: Optional[Sequence[float]] = None) -> LineMap:
    """
    Inverse map; closed form when an inverse evaluator is known, otherwise table inversion.

    Args:
        h: Map to invert
        nodes: Abscissae for tabulating closed forms without an inverse

    Returns:
        h⁻¹ with the same lift convention
    """
    name = f"{h.name}^-1"
    if h.kind == MapKind.CLOSED_FORM.value and h.inverse_func is not None:
        g = h.inverse_func
        anti = None
        if h.antiderivative is not None:
            P = h.antiderivative
            g0 = float(g(np.asarray(0.0)))

            def anti(y):
                # ∫_0^y g + ∫_{g(0)}^{g(y)} h = y g(y)
                gy = g(y)
                return y * gy - (P(gy) - P(g0))

        return LineMap.closed_form(g, name=name, lift=h.lift, inverse=h.func, antiderivative=anti,
                                   params=dict(h.params))

    if h.kind == MapKind.SAMPLED.value:
        xs, hs = np.asarray(h.table_x), np.asarray(h.table_h)
    else:
        if nodes is None:
            if not h.is_circle:
                raise DomainError(f"inverting line map {h.name} needs tabulation nodes", module=MODULE)
            nodes = np.linspace(0.0, 1.0, 2049)
        xs = np.asarray(nodes, dtype=float)
        hs = np.asarray(h(xs), dtype=float)
    if np.any(np.diff(hs) <= 0):
        raise InvariantViolation(f"cannot invert {h.name}: tabulated values are not increasing", module=MODULE)
    return LineMap.from_table(hs, xs, name=name, lift=h.lift)


def compose(g: LineMap, h: LineMap, nodes: Optional[Sequence[float]] = None) -> LineMap:
    """
    Composition g ∘ h.

    Closed forms compose exactly. Otherwise the composition is tabulated on the nodes
    (default: h's table densified, or one period for circle lifts) and interpolated
    monotonically.

    Args:
        g: Outer map
        h: Inner map
        nodes: Optional tabulation abscissae

    Returns:
        Monotone map; circle lift when both inputs are circle lifts
    """
    lift = Lift.CIRCLE if (g.is_circle and h.is_circle) else Lift.LINE
    name = f"{g.name}∘{h.name}"
    if g.kind == MapKind.CLOSED_FORM.value and h.kind == MapKind.CLOSED_FORM.value:
        inverse = None
        if g.inverse_func is not None and h.inverse_func is not None:
            gi, hi = g.inverse_func, h.inverse_func
            inverse = lambda y: hi(gi(y))
        gf, hf = g.func, h.func
        return LineMap.closed_form(lambda x: gf(hf(x)), name=name, lift=lift, inverse=inverse)

    if nodes is None:
        if lift == Lift.CIRCLE:
            nodes = np.linspace(0.0, 1.0, 2049)
        elif h.kind == MapKind.SAMPLED.value:
            base = np.asarray(h.table_x)
            mids = 0.5 * (base[1:] + base[:-1])
            nodes = np.sort(np.concatenate([base, mids]))
        else:
            raise DomainError(f"composing with line map {h.name} needs tabulation nodes", module=MODULE)
    xs = np.asarray(nodes, dtype=float)
    values = np.asarray(g(h(xs)), dtype=float)
    if np.any(np.diff(values) <= 0):
        bad = int(np.argmax(np.diff(values) <= 0))
        raise InvariantViolation(
            f"composition {name} lost monotonicity near x = {xs[bad]:.6g}",
            module=MODULE
        )
    return LineMap.from_table(xs, values, name=name, lift=lift)


def affine_conjugate(h: LineMap, a: Tuple[float, float], b: Tuple[float, float]) -> LineMap:
    """
    A ∘ h ∘ B for increasing affine A(y) = a[0] y + a[1] and B(x) = b[0] x + b[1].

    The primitive transforms exactly: ∫_0^x A(h(B s)) ds = a0 (P(Bx) - P(b1)) / b0 + a1 x.
    """
    a0, a1 = float(a[0]), float(a[1])
    b0, b1 = float(b[0]), float(b[1])
    if a0 <= 0 or b0 <= 0:
        raise DomainError("affine factors must be increasing", module=MODULE)
    P = h.primitive
    P_b1 = float(P(np.asarray(b1)))
    inverse = None
    if h.inverse_func is not None:
        hi = h.inverse_func
        inverse = lambda y: (hi((y - a1) / a0) - b1) / b0
    lift = Lift.CIRCLE if (h.is_circle and a0 == 1.0 and b0 == 1.0) else Lift.LINE
    return LineMap.closed_form(
        lambda x: a0 * h(b0 * x + b1) + a1,
        name=f"A∘{h.name}∘B",
        lift=lift,
        inverse=inverse,
        antiderivative=lambda x: a0 * (P(b0 * x + b1) - P_b1) / b0 + a1 * x,
        params={"a0": a0, "a1": a1, "b0": b0, "b1": b1}
    )


def _circle_displacement(h: LineMap, xs: np.ndarray) -> float:
    # |e^{2πi h(s)} - e^{2πi s}| = 2 |sin(π (h(s) - s))|
    return float(np.max(2.0 * np.abs(np.sin(math.pi * (h(xs) - xs)))))


def in_neighborhood(h: LineMap, eps: float, samples: int = 512) -> bool:
    """
    Sampled membership test for the basic neighbourhood V(ε) of the identity.

    Both h and h⁻¹ must move points of the circle by less than ε, and the sampled
    quasisymmetry constant must not exceed 1 + ε. The verdict is only as accurate as
    the sampling grid.

    Args:
        h: Circle map given by its lift
        eps: Neighbourhood size, strictly positive
        samples: Points per period

    Returns:
        True when both conditions hold on the grid
    """
    if eps <= 0:
        raise DomainError(f"neighbourhood size must be positive, got {eps}", module=MODULE)
    if not h.is_circle:
        raise DomainError(f"map {h.name} is not a circle lift", module=MODULE)

    xs = np.linspace(0.0, 1.0, samples, endpoint=False)
    h_inv = invert(h)
    displacement = max(_circle_displacement(h, xs), _circle_displacement(h_inv, xs))
    if displacement >= eps:
        logger.debug(f"{h.name} fails displacement test: {displacement:.3e} >= {eps:.3e}")
        return False

    ts = np.geomspace(CIRCLE_T_LIMIT * 0.99, 1.0 / samples, 24)
    m = qs_constant(h, xs, ts)
    if m > 1.0 + eps:
        logger.debug(f"{h.name} fails quasisymmetry test: M = {m:.6g} > {1 + eps:.6g}")
        return False
    return True


def ratio_distortion_profile(h: LineMap, scales, x_grid) -> RatioDistortionProfile:
    """
    Worst deviation max(ratio, 1/ratio) - 1 at each scale.

    A profile that trends to zero marks h as numerically symmetric.
    """
    scales = [float(t) for t in scales]
    if any(t <= 0 for t in scales) or any(s <= t for s, t in zip(scales, scales[1:])):
        raise DomainError("scales must be positive and strictly decreasing", module=MODULE)
    xs = np.asarray(x_grid, dtype=float)
    epsilon = []
    for t in scales:
        ratio = _ratios(h, xs, np.full_like(xs, t))
        epsilon.append(float(max(0.0, np.max(np.maximum(ratio, 1.0 / ratio)) - 1.0)))
    return RatioDistortionProfile(scales=scales, epsilon=epsilon)


def holder_exponent_bound(M: float) -> float:
    """
    Hölder exponent log((M+1)/M) / log 2 guaranteed by a quasisymmetry constant M.

    Args:
        M: Quasisymmetry constant, at least 1

    Returns:
        Exponent in (0, 1]
    """
    if M < 1:
        raise DomainError(f"quasisymmetry constant must be at least 1, got {M}", module=MODULE)
    return math.log((M + 1.0) / M) / math.log(2.0)


def linear_conjugacy(lambda0: float, lambda1: float) -> LineMap:
    """
    Conjugacy h(x) = sign(x) |x|^α, α = log λ1 / log λ0, between x -> λ0 x and x -> λ1 x.

    h(λ0 x) = λ1 h(x), h(0) = 0 and h(1) = 1.
    """
    if lambda0 <= 1 or lambda1 <= 1:
        raise DomainError(f"expansion factors must exceed 1, got {lambda0}, {lambda1}", module=MODULE)
    alpha = math.log(lambda1) / math.log(lambda0)
    return power_map(alpha, name=f"conj({lambda0:g},{lambda1:g})")


def power_map(alpha: float, name: Optional[str] = None) -> LineMap:
    """sign(x)|x|^α with exact inverse and primitive |x|^{α+1}/(α+1)."""
    if alpha <= 0:
        raise DomainError(f"power exponent must be positive, got {alpha}", module=MODULE)
    if alpha == 1.0:
        return LineMap.closed_form(lambda x: x + 0.0, name=name or "identity", inverse=lambda y: y + 0.0,
                                   antiderivative=lambda x: 0.5 * np.asarray(x) ** 2, params={"alpha": 1.0})
    return LineMap.closed_form(
        lambda x: np.sign(x) * np.abs(x) ** alpha,
        name=name or f"power({alpha:g})",
        inverse=lambda y: np.sign(y) * np.abs(y) ** (1.0 / alpha),
        antiderivative=lambda x: np.abs(x) ** (alpha + 1.0) / (alpha + 1.0),
        params={"alpha": alpha}
    )


def power_law_system(lambda0: float, lambda1: float) -> PowerLawSystem:
    return PowerLawSystem(lambda0=lambda0, lambda1=lambda1, conjugacy=linear_conjugacy(lambda0, lambda1))


def empirical_holder(h: LineMap, x0: float, scales) -> float:
    """
    Least-squares slope of log |h(x0+t) - h(x0)| against log t.

    Args:
        h: Boundary map
        x0: Base point
        scales: Positive scales, ideally spanning three decades or more

    Returns:
        Fitted exponent
    """
    t = np.asarray(scales, dtype=float)
    if t.size < 3:
        raise DomainError(f"regression needs at least 3 scales, got {t.size}", module=MODULE)
    if np.any(t <= 0):
        raise DomainError("scales must be positive", module=MODULE)
    span = math.log10(t.max() / t.min())
    if span < 3:
        logger.warning(f"Holder regression for {h.name} spans only {span:.2f} decades")
    increments = np.abs(h(x0 + t) - h(x0))
    if np.any(increments <= 0):
        raise InvariantViolation(f"map {h.name} is constant near x0 = {x0}", module=MODULE)
    slope, _ = np.polyfit(np.log(t), np.log(increments), 1)
    return float(slope)


def holder_modulus_check(h: LineMap, xs, alpha: Optional[float] = None,
                         t_grid: Optional[Sequence[float]] = None) -> HolderCheck:
    """
    Fit C in |h(x) - h(y)| <= C |x - y|^α on the coarser half of the sampled pairs and
    report how far the finer pairs exceed it.

    Args:
        h: Boundary map
        xs: Sample points; all pairs are used
        alpha: Exponent; defaults to holder_exponent_bound of the grid quasisymmetry constant
        t_grid: Scales for the quasisymmetry estimate when alpha is not given

    Returns:
        HolderCheck with the fitted constant and the worst ratio
    """
    xs = np.sort(np.asarray(xs, dtype=float))
    if alpha is None:
        span = xs[-1] - xs[0]
        ts = np.asarray(t_grid) if t_grid is not None else np.geomspace(0.25 * span, span / (4 * xs.size), 24)
        alpha = holder_exponent_bound(qs_constant(h, xs, ts))
    i, j = np.triu_indices(xs.size, k=1)
    dx = xs[j] - xs[i]
    dh = np.abs(h(xs[j]) - h(xs[i]))
    ratio = dh / dx ** alpha
    coarse = dx >= np.median(dx)
    constant = float(np.max(ratio[coarse]))
    worst = float(np.max(ratio) / constant)
    return HolderCheck(alpha=float(alpha), constant=constant, worst_ratio=worst, pairs=int(dx.size))


def neighborhood_composition_search(maps: Sequence[LineMap], eps: float,
                                    deltas: Sequence[float] = (0.5, 0.25, 0.1, 0.05, 0.02, 0.01),
                                    samples: int = 256) -> NeighborhoodSearch:
    """
    Largest δ among the candidates for which every composition g∘h of family members
    in V(δ) lies in V(ε).

    Returns:
        NeighborhoodSearch with the chosen delta (None when no candidate works), the
        members in V(δ), the compositions checked and the rejected candidates
    """
    if eps <= 0:
        raise DomainError(f"neighborhood radius must be positive, got {eps}", module=MODULE)
    rejected: List[float] = []
    for delta in sorted(deltas, reverse=True):
        members = [h for h in maps if in_neighborhood(h, delta, samples)]
        checked = 0
        passed = True
        for g in members:
            for h in members:
                checked += 1
                if not in_neighborhood(compose(g, h), eps, samples):
                    passed = False
                    break
            if not passed:
                break
        if passed:
            logger.info(f"V({delta:g})∘V({delta:g}) ⊂ V({eps:g}) on {len(members)} members")
            return NeighborhoodSearch(eps=eps, delta=delta, members=[h.name for h in members],
                                      checked=checked, rejected=rejected)
        rejected.append(float(delta))
    logger.warning(f"No candidate δ keeps compositions inside V({eps:g})")
    return NeighborhoodSearch(eps=eps, rejected=rejected)


def compose_constant_profile(pairs: Sequence[Tuple[LineMap, LineMap]], x_grid, t_grid) -> List[Dict[str, float]]:
    """Measured quasisymmetry constants of g, h and g∘h for each pair."""
    rows = []
    for g, h in pairs:
        gh = compose(g, h)
        rows.append({
            "g": g.name,
            "h": h.name,
            "M_g": qs_constant(g, x_grid, t_grid),
            "M_h": qs_constant(h, x_grid, t_grid),
            "M_gh": qs_constant(gh, x_grid, t_grid),
        })
    return rows
