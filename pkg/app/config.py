"""Environment settings and TOML run configuration"""

import logging
import sys
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.errors import ConfigError
from app.models.grids import HalfPlaneGrid, Tolerance
from app.models.kernels import KernelKind

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

MODULE = "config"


class Settings(BaseSettings):
    """Process-level settings read from TEICH_* variables and an optional .env file"""
    model_config = SettingsConfigDict(env_prefix="TEICH_", env_file=".env", extra="ignore")

    log_level: str = Field(default="INFO", description="Root logging level")
    output_dir: str = Field(default="out", description="Directory for run artifacts")
    seed: int = Field(default=20240229, description="Seed for randomised corpora")
    schema_version: str = Field(default="1.0", description="Version stamped into every JSON summary")


@lru_cache()
def get_settings() -> Settings:
    return Settings()


class RunSection(BaseModel):
    name: str = Field(default="run", description="Run label used in file names")
    output_dir: Optional[str] = Field(default=None, description="Overrides TEICH_OUTPUT_DIR")
    seed: Optional[int] = Field(default=None, description="Overrides TEICH_SEED")


class GridSection(BaseModel):
    x_extent: float = Field(default=1e3, gt=0, description="Half-width of the horizontal truncation")
    y_min: float = Field(default=1e-4, gt=0, description="Inner cutoff height")
    y_max: float = Field(default=1e3, gt=0, description="Truncation height")
    order: int = Field(default=8, ge=1, description="Base Gauss-Legendre order")
    order_step: int = Field(default=4, ge=0, description="Order increase per level")
    ratio: float = Field(default=2.0, gt=1, description="Geometric grading ratio")
    max_dx: Optional[float] = Field(default=None, gt=0, description="Largest panel width")
    max_dy: Optional[float] = Field(default=None, gt=0, description="Largest panel height")


class ToleranceSection(BaseModel):
    abs_tol: float = Field(default=1e-10, gt=0)
    rel_tol: float = Field(default=1e-7, gt=0)
    max_depth: int = Field(default=3, ge=1)


class LatticeSection(BaseModel):
    """Uniform sampling lattice of the upper half-plane"""
    x_min: float = Field(default=-2.0)
    x_max: float = Field(default=2.0)
    y_min: float = Field(default=0.01, gt=0)
    y_max: float = Field(default=2.0, gt=0)
    nx: int = Field(default=100, ge=1)
    ny: int = Field(default=100, ge=1)

    def grid(self) -> HalfPlaneGrid:
        return HalfPlaneGrid.lattice(self.x_min, self.x_max, self.y_min, self.y_max, self.nx, self.ny)


class QsMeasureSection(BaseModel):
    x_min: float = Field(default=-1.0)
    x_max: float = Field(default=1.0)
    nx: int = Field(default=129, ge=1)
    t_min: float = Field(default=1e-3, gt=0)
    t_max: float = Field(default=0.5, gt=0)
    nt: int = Field(default=24, ge=1, description="Geometric scale count")
    neighborhood_eps: float = Field(default=0.1, gt=0, description="ε of the V(ε) membership test")


class ExtendSection(LatticeSection):
    doubled: bool = Field(default=True, description="Doubled imaginary part")


class DilatationSection(LatticeSection):
    doubled: bool = Field(default=True)
    step: Optional[float] = Field(default=None, gt=0, description="Difference step, default Im z / 100")


class HilbertSection(BaseModel):
    samples: int = Field(default=64, ge=1, description="Equispaced angles on [0, 2π)")
    method: str = Field(default="nodes", description="'nodes' or 'adaptive'")
    nodes: int = Field(default=2 ** 14, ge=4)
    beltrami: bool = Field(default=False, description="Add the Beltrami route on line-chart points (slow)")
    beltrami_points: List[float] = Field(
        default_factory=lambda: [-2.0, -0.5, 0.5, 2.0, 3.0],
        min_length=4,
        description="Line-chart points for the Beltrami route, not 0 or 1"
    )


class ApproxRateSection(BaseModel):
    n_list: List[int] = Field(default_factory=lambda: [4, 8, 16, 32, 64, 128, 256])
    kind: KernelKind = Field(default=KernelKind.JACKSON_VDP)
    zygmund_scales: int = Field(default=24, ge=2, description="Dyadic t values for the forward check")


class PairingSection(BaseModel):
    field: int = Field(default=0, ge=0, description="Index into [[fields]] (line chart)")
    points: List[float] = Field(default_factory=lambda: [2.0], description="Basis points x_j")
    weights: List[float] = Field(default_factory=lambda: [1.0], description="Basis weights λ_j")
    doubled: bool = Field(default=True)


class DistanceSection(LatticeSection):
    phi_points: List[float] = Field(default_factory=lambda: [-3.0, -0.5, 0.5, 2.0, 4.0])
    degenerate: List[List[float]] = Field(default_factory=lambda: [[0.0, 0.5], [0.0, 0.1]],
                                          description="(x, t) members of the degenerating family")


class QfCheckSection(BaseModel):
    samples: int = Field(default=1000, ge=1)
    coefficients: int = Field(default=8, ge=1)
    tolerance: float = Field(default=1e-15, gt=0)


class RunConfig(BaseModel):
    """Validated contents of a run configuration file"""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    run: RunSection = Field(default_factory=RunSection)
    grid: GridSection = Field(default_factory=GridSection)
    tolerance: ToleranceSection = Field(default_factory=ToleranceSection)
    maps: List[Dict[str, Any]] = Field(default_factory=lambda: [{"kind": "identity"}])
    vector_fields: List[Dict[str, Any]] = Field(
        default_factory=lambda: [{"kind": "weierstrass"}],
        alias="fields",
        description="[[fields]] tables"
    )
    qs_measure: QsMeasureSection = Field(default_factory=QsMeasureSection)
    extend: ExtendSection = Field(default_factory=ExtendSection)
    dilatation_field: DilatationSection = Field(default_factory=DilatationSection)
    hilbert: HilbertSection = Field(default_factory=HilbertSection)
    approx_rate: ApproxRateSection = Field(default_factory=ApproxRateSection)
    pairing: PairingSection = Field(default_factory=PairingSection)
    distance_bracket: DistanceSection = Field(default_factory=DistanceSection)
    qf_check: QfCheckSection = Field(default_factory=QfCheckSection)

    def grid_model(self) -> HalfPlaneGrid:
        g = self.grid
        return HalfPlaneGrid.symmetric(
            g.x_extent, g.y_min, y_max=g.y_max, order=g.order, order_step=g.order_step,
            ratio=g.ratio, max_dx=g.max_dx, max_dy=g.max_dy
        )

    def tolerance_model(self) -> Tolerance:
        return Tolerance(**self.tolerance.model_dump())

    def output_dir(self, settings: Optional[Settings] = None) -> Path:
        settings = settings or get_settings()
        return Path(self.run.output_dir or settings.output_dir)

    def seed(self, settings: Optional[Settings] = None) -> int:
        settings = settings or get_settings()
        return self.run.seed if self.run.seed is not None else settings.seed


def load_run_config(path: Optional[Union[str, Path]]) -> RunConfig:
    """
    Parse and validate a TOML run configuration; no path gives the defaults.

    Raises:
        ConfigError: Missing file, bad TOML or a schema violation
    """
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        with path.open("rb") as handle:
            raw = tomllib.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"configuration file {path} does not exist", module=MODULE)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path} is not valid TOML: {e}", module=MODULE)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}", module=MODULE)

    # TOML keys use dashes for subcommand tables, model fields use underscores
    normalized = {key.replace("-", "_"): value for key, value in raw.items()}
    try:
        config = RunConfig(**normalized)
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}", module=MODULE)
    logger.info(f"Loaded run configuration from {path}")
    return config
