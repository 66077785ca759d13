"""Trigonometric Approximation Service - summability kernels, Jackson approximation and rate profiles"""

import logging
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import fminbound

from app.errors import DomainError
from app.models.fields import Chart, FieldKind, VectorField
from app.models.kernels import KernelKind, RateProfile, TrigKernel, fejer_values

logger = logging.getLogger(__name__)

MODULE = "trigapprox"

OVERSAMPLE = 8
ZYGMUND_CHAIN = 20.0


def _check_degree(n: int) -> None:
    if n < 1:
        raise DomainError(f"kernel parameter must be at least 1, got {n}", module=MODULE)


def fejer_kernel(n: int, t):
    """σ_n(t) = (1/2πn)(sin(nt/2)/sin(t/2))², equal to n/2π at t = 0."""
    _check_degree(n)
    value = fejer_values(n, t)
    return float(value) if np.ndim(value) == 0 else value


def jackson_kernel(n: int, t, kind: KernelKind = KernelKind.JACKSON_VDP):
    """
    Jackson-type kernel of parameter n.

    jackson-paper is the literal difference σ_{2n-1} - 2σ_n (mass -1); jackson-vdp is the delayed mean
    2σ_{2n} - σ_n (mass 1, multipliers 1 up to degree n).
    """
    _check_degree(n)
    return TrigKernel(n=n, kind=kind)(t)


def kernel_multipliers(kernel: TrigKernel, k):
    """Exact Fourier multipliers of the kernel on the harmonics k."""
    return kernel.multipliers(k)


def _coefficients(V: VectorField, degree: int, oversample: int = OVERSAMPLE) -> Tuple[float, np.ndarray, np.ndarray]:
    """(a0, a_k, b_k) for k = 1..degree, from the trigonometric form or a dense real FFT."""
    if V.kind != FieldKind.CLOSED_FORM.value:
        trig = V.to_trig()
        a = np.zeros(degree)
        b = np.zeros(degree)
        m = min(degree, len(trig.a))
        a[:m] = trig.a[:m]
        b[:m] = trig.b[:m]
        return trig.a0, a, b
    if V.chart != Chart.ANGLE.value:
        raise DomainError(f"field {V.name} must be periodic in the angle chart", module=MODULE)
    size = 1 << max(6, int(math.ceil(math.log2(oversample * max(degree, 1)))))
    x = 2.0 * math.pi * np.arange(size) / size
    coeffs = np.fft.rfft(np.asarray(V(x), dtype=float)) / size
    a = 2.0 * coeffs.real[1:degree + 1]
    b = -2.0 * coeffs.imag[1:degree + 1]
    return float(coeffs.real[0]), a, b


def approximate(V: VectorField, n: int, kind: KernelKind = KernelKind.JACKSON_VDP,
                oversample: int = OVERSAMPLE) -> VectorField:
    """
    Convolution of V with the kernel of parameter n.

    Trigonometric inputs are multiplied coefficientwise; sampled and closed-form inputs
    are first transformed on at least `oversample` times the kernel degree.

    Args:
        V: Periodic field in the angle chart
        n: Kernel parameter
        kind: Kernel family
        oversample: Sampling factor over the kernel degree for closed forms

    Returns:
        Trigonometric field of degree at most 2n - 1
    """
    _check_degree(n)
    kernel = TrigKernel(n=n, kind=kind)
    degree = kernel.trig_degree
    a0, a, b = _coefficients(V, degree, oversample)
    if degree == 0:
        return VectorField.trig(kernel.mass * a0, name=f"{kind}[{n}]*{V.name}")
    m = kernel.multipliers(np.arange(1, degree + 1))
    return VectorField.trig(kernel.mass * a0, (m * a).tolist(), (m * b).tolist(), name=f"{kind}[{n}]*{V.name}")


def _refined_max(f: Callable, grid: np.ndarray, candidates: int = 8) -> float:
    """Maximum of |f| from a dense grid, refined by bounded scalar search around the best samples."""
    values = np.abs(np.asarray(f(grid), dtype=float))
    h = grid[1] - grid[0]
    best = float(values.max())
    for i in np.argsort(values)[::-1][:candidates]:
        x = float(grid[i])
        xopt = fminbound(lambda s: -abs(float(f(np.asarray(s)))), x - h, x + h, xtol=1e-13)
        best = max(best, abs(float(f(np.asarray(xopt)))))
    return best


def sup_norm(V: Callable, samples: int = 4096) -> float:
    """Dense-grid sup norm of a periodic function."""
    x = 2.0 * math.pi * np.arange(samples) / samples
    return float(np.max(np.abs(np.asarray(V(x), dtype=float))))


def bernstein_ratio(V: VectorField, density: int = 256) -> float:
    """
    ‖V'‖∞ / (n ‖V‖∞) for a trigonometric polynomial of exact degree n.

    Both suprema come from a grid of density·n points per period refined by scalar search,
    so the ratio stays within a few ulps of the true value.
    """
    n = V.degree
    if n == 0:
        if V.to_trig().a0 == 0.0:
            raise DomainError("Bernstein ratio is undefined for the zero polynomial", module=MODULE)
        raise DomainError("Bernstein ratio needs degree at least 1", module=MODULE)
    grid = 2.0 * math.pi * np.arange(density * n) / (density * n)
    dv = V.derivative()
    ratio = _refined_max(dv, grid) / (n * _refined_max(V, grid))
    logger.debug(f"Bernstein ratio of {V.name} (degree {n}) = {ratio:.12f}")
    return ratio


def rate_profile(V: VectorField, n_list: Sequence[int], kind: KernelKind = KernelKind.JACKSON_VDP,
                 samples: Optional[int] = None) -> RateProfile:
    """
    Sup-norm error of the kernel approximation per n, with the scaled errors n·err.

    Args:
        V: Periodic field in the angle chart
        n_list: Strictly increasing kernel parameters
        kind: Kernel family
        samples: Evaluation grid size; defaults to 8 times the largest degree involved

    Returns:
        RateProfile
    """
    n_list = [int(n) for n in n_list]
    if any(a >= b for a, b in zip(n_list, n_list[1:])):
        raise DomainError("rate profile degrees must be strictly increasing", module=MODULE)
    top = 2 * max(n_list, default=1)
    if V.kind != FieldKind.CLOSED_FORM.value:
        top = max(top, V.degree)
    size = samples or max(4096, OVERSAMPLE * top)
    x = 2.0 * math.pi * np.arange(size) / size
    values = np.asarray(V(x), dtype=float)

    errors = []
    for n in n_list:
        approx = approximate(V, n, kind)
        errors.append(float(np.max(np.abs(values - approx(x)))))
    profile = RateProfile(n=n_list, error=errors)
    logger.info(f"Rate profile of {V.name}: C' = {profile.bound:.6g} over n = {n_list[0]}..{n_list[-1]}")
    return profile


def zygmund_from_rate(profile: RateProfile) -> float:
    """Bound on |Δ²_t V| / t implied by ‖V - V_n‖∞ <= C'/n through the 8C + 12C chain."""
    return ZYGMUND_CHAIN * profile.bound


def magnify(V: VectorField, k: int, interval: Tuple[float, float], rel_tol: float = 1e-12) -> VectorField:
    """
    M_{k,I} V(x) = V(2^k x) / 2^k for x in an interval I of length 2π/2^k.

    The result is a closed-form field defined on I only; evaluating it outside the closed
    interval raises DomainError. Trigonometric inputs are rescaled harmonic by harmonic
    (harmonic j moves to 2^k j) before the restriction.
    """
    if k < 0:
        raise DomainError(f"magnification degree must be non-negative, got {k}", module=MODULE)
    lo, hi = float(interval[0]), float(interval[1])
    scale = 2 ** k
    expected = 2.0 * math.pi / scale
    if abs((hi - lo) - expected) > rel_tol * expected:
        raise DomainError(
            f"interval [{lo:g}, {hi:g}] has length {hi - lo:.6g}, expected 2π/2^{k} = {expected:.6g}",
            module=MODULE
        )
    name = f"M[{k},{lo:g}]({V.name})"
    if V.kind != FieldKind.CLOSED_FORM.value:
        trig = V.to_trig()
        size = scale * len(trig.a)
        a = np.zeros(size)
        b = np.zeros(size)
        a[scale - 1::scale] = np.asarray(trig.a) / scale
        b[scale - 1::scale] = np.asarray(trig.b) / scale
        rescaled = VectorField.trig(trig.a0 / scale, a.tolist(), b.tolist(), name=name)
    else:
        func = V.func

        def rescaled(x):
            return func(scale * np.asarray(x)) / scale

    slack = rel_tol * expected

    def on_interval(x):
        x = np.asarray(x, dtype=float)
        if np.any((x < lo - slack) | (x > hi + slack)):
            raise DomainError(f"{name} is defined on [{lo:g}, {hi:g}] only", module=MODULE)
        return rescaled(x)

    return VectorField.closed_form(on_interval, chart=V.chart, name=name)


def interval_oscillation(V: Callable, interval: Tuple[float, float], samples: int = 2049) -> float:
    """max - min of V over a closed interval, sampled."""
    x = np.linspace(interval[0], interval[1], samples)
    values = np.asarray(V(x), dtype=float)
    return float(values.max() - values.min())
