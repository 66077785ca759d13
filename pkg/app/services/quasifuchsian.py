"""Quasi-Fuchsian Service - the almost complex operators I, J, K on two-sided coefficients"""

import logging
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from app.models.differentials import Symmetry, TwoSidedBeltrami
from app.models.reports import QuaternionTable, RelationResidual

logger = logging.getLogger(__name__)

MODULE = "quasifuchsian"

TOLERANCE = 1e-15

_J_SYMMETRY = {
    Symmetry.SYMMETRIC.value: Symmetry.ANTISYMMETRIC,
    Symmetry.ANTISYMMETRIC.value: Symmetry.SYMMETRIC,
}


def op_I(mu: TwoSidedBeltrami) -> TwoSidedBeltrami:
    """(μ₁, μ₂) -> (iμ₁, iμ₂). Swaps symmetric and antisymmetric coefficients."""
    upper, lower = mu.upper, mu.lower
    if mu.symmetry == Symmetry.ZERO_BELOW.value:
        symmetry = Symmetry.ZERO_BELOW
    else:
        symmetry = _J_SYMMETRY.get(mu.symmetry, Symmetry.AD_HOC)
    return TwoSidedBeltrami(
        name=f"I({mu.name})",
        upper=lambda z: 1j * upper(z),
        lower=lambda z: 1j * lower(z),
        symmetry=symmetry,
        sup_bound=mu.sup_bound
    )


def op_J(mu: TwoSidedBeltrami) -> TwoSidedBeltrami:
    """
    (μ₁, μ₂) -> (conj μ₂(z̄) on H, -conj μ₁(z̄) on H*).

    Symmetric coefficients go to antisymmetric ones and back.
    """
    upper, lower = mu.upper, mu.lower
    return TwoSidedBeltrami(
        name=f"J({mu.name})",
        upper=lambda z: np.conj(lower(np.conj(z))),
        lower=lambda z: -np.conj(upper(np.conj(z))),
        symmetry=_J_SYMMETRY.get(mu.symmetry, Symmetry.AD_HOC),
        sup_bound=mu.sup_bound
    )


def op_K(mu: TwoSidedBeltrami) -> TwoSidedBeltrami:
    """K = I∘J; on symmetric coefficients this is μ -> (iμ on H, -iμ on H*)."""
    result = op_I(op_J(mu))
    symmetry = mu.symmetry if mu.symmetry in _J_SYMMETRY else Symmetry.AD_HOC
    return result.model_copy(update={"name": f"K({mu.name})", "symmetry": symmetry})


def _values(mu: TwoSidedBeltrami, upper_points: np.ndarray) -> np.ndarray:
    """μ on the upper points followed by μ on their reflections."""
    return np.concatenate([
        np.asarray(mu.upper(upper_points), dtype=complex),
        np.asarray(mu.lower(np.conj(upper_points)), dtype=complex),
    ])


def _negate(mu: TwoSidedBeltrami) -> TwoSidedBeltrami:
    upper, lower = mu.upper, mu.lower
    return TwoSidedBeltrami(name=f"-{mu.name}", upper=lambda z: -upper(z), lower=lambda z: -lower(z))


def quaternion_table(mu: TwoSidedBeltrami, points: Sequence[complex], tol: float = TOLERANCE,
                     symmetric_probe: Optional[TwoSidedBeltrami] = None) -> QuaternionTable:
    """
    Pointwise residuals of the operator identities on one coefficient.

    Args:
        mu: Two-sided coefficient under test
        points: Upper half-plane sample points (their reflections are sampled too)
        tol: Pass threshold for every residual, scaled by max |μ|
        symmetric_probe: Symmetric coefficient for the reflection checks; defaults to the
            symmetrisation of mu's upper half

    Returns:
        QuaternionTable
    """
    z = np.asarray(points, dtype=complex)
    z = np.where(z.imag < 0, np.conj(z), z)
    base = _values(mu, z)
    scale = max(float(np.max(np.abs(base), initial=0.0)), 1.0)

    def compose(*ops: Callable) -> Callable:
        def apply(m):
            for op in reversed(ops):
                m = op(m)
            return m
        return apply

    relations: Dict[str, tuple] = {
        "I^2 = -1": (compose(op_I, op_I), _negate),
        "J^2 = -1": (compose(op_J, op_J), _negate),
        "K^2 = -1": (compose(op_K, op_K), _negate),
        "IJ = K": (compose(op_I, op_J), op_K),
        "JK = I": (compose(op_J, op_K), op_I),
        "KI = J": (compose(op_K, op_I), op_J),
        "IJ = -JI": (compose(op_I, op_J), compose(_negate, op_J, op_I)),
        "JK = -KJ": (compose(op_J, op_K), compose(_negate, op_K, op_J)),
        "KI = -IK": (compose(op_K, op_I), compose(_negate, op_I, op_K)),
    }

    table = QuaternionTable(tolerance=tol)
    for label, (lhs, rhs) in relations.items():
        residual = float(np.max(np.abs(_values(lhs(mu), z) - _values(rhs(mu), z)), initial=0.0))
        table.relations.append(RelationResidual(relation=label, residual=residual, passed=residual <= tol * scale))

    for label, op in (("|I mu| = |mu|", op_I), ("|J mu| = |mu|", op_J), ("|K mu| = |mu|", op_K)):
        image = _values(op(mu), z)
        # J swaps the halves, so compare moduli against the reflected source values
        source = base if op is op_I else np.concatenate([base[z.size:], base[:z.size]])
        residual = float(np.max(np.abs(np.abs(image) - np.abs(source)), initial=0.0))
        table.isometry.append(RelationResidual(relation=label, residual=residual, passed=residual <= tol * scale))

    probe = symmetric_probe or TwoSidedBeltrami.symmetric(mu.upper, name=f"sym({mu.name})")
    k_image = op_K(probe)
    j_image = op_J(probe)
    k_defect = float(np.max(np.abs(k_image.lower(np.conj(z)) - np.conj(k_image.upper(z))), initial=0.0))
    j_defect = float(np.max(np.abs(j_image.lower(np.conj(z)) + np.conj(j_image.upper(z))), initial=0.0))
    table.symmetry.append(RelationResidual(relation="K symmetric -> symmetric", residual=k_defect,
                                           passed=k_defect <= tol * scale))
    table.symmetry.append(RelationResidual(relation="J symmetric -> antisymmetric", residual=j_defect,
                                           passed=j_defect <= tol * scale))

    logger.info(f"Quaternion table for {mu.name}: {'pass' if table.all_passed else 'FAIL'}")
    return table
