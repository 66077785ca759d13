"""Models for computed bounds, check tables and run summaries"""

from pydantic import BaseModel, Field
from typing import Any, Dict, List, Optional


class StrebelRatio(BaseModel):
    """Reich–Strebel functionals of one differential, each divided by its norm on the same nodes"""
    phi: str = Field(description="Name of the quadratic differential")
    norm: float = Field(description="∫∫ |φ| on the quadrature nodes")
    lower_integral: float = Field(description="(1/‖φ‖) ∫∫ |1 - μφ/|φ||² |φ| / (1 - |μ|²)")
    upper_integral: float = Field(description="(1/‖φ‖) ∫∫ |1 + μφ/|φ||² |φ| / (1 - |μ|²)")
    error: float = Field(default=0.0, description="Largest quadrature error estimate of the three integrals")
    converged: bool = Field(default=True, description="Whether every integral met its tolerance")


class NormBracket(BaseModel):
    """Infinitesimal norm of a Beltrami tangent vector, sampled lower side and sup-norm upper side"""
    lower: float = Field(description="max over φ of the phase-swept |Re ∫∫ μφ| / ‖φ‖")
    upper: float = Field(description="‖μ‖∞ (declared or sampled)")
    pairings: List[float] = Field(default_factory=list, description="Per-φ normalised pairing modulus")


class SampledNorm(BaseModel):
    """Maximum of a weighted quadrature over sample points, with its worst error"""
    value: float = Field(description="Largest weighted modulus")
    error: float = Field(description="Largest weighted error estimate, tails included")
    converged: bool = Field(description="Whether every point met its tolerance")
    argmax: Optional[complex] = Field(default=None, description="Sample point attaining the maximum")
    points: int = Field(default=0, description="Number of sample points")


class RouteAgreement(BaseModel):
    """Beltrami-route Hilbert transform against the Fourier route on line-chart points"""
    field: str = Field(description="Name of the transformed field")
    points: List[float] = Field(description="Line-chart evaluation points")
    neg_v_mu_hat: List[float] = Field(description="-V of the rotated coefficient at the points")
    fourier: List[float] = Field(description="Fourier-route transform expressed in the line chart")
    quadratic: List[float] = Field(description="Least-squares quadratic (u², u, 1) of the difference")
    residual: float = Field(description="Largest deviation of the difference from that quadratic")
    error: float = Field(default=0.0, description="Largest quadrature error estimate, tails included")
    converged: bool = Field(default=True, description="Whether every V evaluation met its tolerance")


class BracketRecord(BaseModel):
    """Teichmüller distance bracket for one boundary map"""
    map_id: str = Field(description="Map identifier")
    k_ba: float = Field(description="Sampled dilatation of the averaging extension")
    d_upper: float = Field(description="½ log K(BA)")
    d_lower: float = Field(description="Reich–Strebel lower bound over the φ list")
    gap: float = Field(description="d_upper - d_lower")
    ratios: List[StrebelRatio] = Field(default_factory=list, description="Per-φ functionals")


class RelationResidual(BaseModel):
    """Residual of one operator identity on sampled coefficients"""
    relation: str = Field(description="Identity checked, e.g. 'IJ = K'")
    residual: float = Field(description="Largest pointwise deviation")
    passed: bool = Field(description="residual <= tolerance")


class QuaternionTable(BaseModel):
    """Operator-algebra check for I, J, K"""
    tolerance: float = Field(description="Pass threshold for every residual")
    relations: List[RelationResidual] = Field(default_factory=list, description="Operator identities")
    isometry: List[RelationResidual] = Field(default_factory=list, description="Pointwise modulus checks")
    symmetry: List[RelationResidual] = Field(
        default_factory=list,
        description="Reflection behaviour on symmetric input (K symmetric, J antisymmetric)"
    )

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.relations + self.isometry + self.symmetry)


class RunSummary(BaseModel):
    """JSON summary written by every CLI run"""
    schema_version: str = Field(description="Summary schema version")
    command: str = Field(description="Subcommand that produced the run")
    config: Dict[str, Any] = Field(default_factory=dict, description="Effective configuration with defaults")
    results: Dict[str, Any] = Field(default_factory=dict, description="Headline values")
    files: List[str] = Field(default_factory=list, description="Data files written next to the summary")
    warnings: List[str] = Field(default_factory=list, description="Flagged non-convergence and caveats")


class ErrorRecord(BaseModel):
    """Failure record written as error.json"""
    category: str = Field(description="Error category")
    module: Optional[str] = Field(None, description="Originating module")
    message: str = Field(description="Diagnostic message")
    exit_code: int = Field(description="Process exit status")
