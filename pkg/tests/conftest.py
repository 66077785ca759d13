"""Shared fixtures: corpus maps, fields and reduced quadrature grids"""

import numpy as np
import pytest

from app.config import get_settings
from app.models.grids import HalfPlaneGrid, Tolerance
from app.services import corpus


@pytest.fixture(autouse=True)
def _fresh_settings(monkeypatch, tmp_path):
    """Settings are cached per process; tests read them from a clean environment."""
    for key in ("TEICH_LOG_LEVEL", "TEICH_OUTPUT_DIR", "TEICH_SEED", "TEICH_SCHEMA_VERSION"):
        monkeypatch.delenv(key, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def lattice():
    """100 x 100 midpoint lattice of [-2, 2] x [0.01, 2]."""
    return HalfPlaneGrid.lattice(-2.0, 2.0, 0.01, 2.0, 100, 100)


@pytest.fixture
def small_lattice():
    return HalfPlaneGrid.lattice(-3.0, 3.0, 0.05, 3.0, 24, 24)


@pytest.fixture
def pairing_grid():
    """Grid for pairings of line fields: moderate extent keeps the averaging formulas accurate."""
    return HalfPlaneGrid.symmetric(200.0, 1e-4, y_max=200.0)


@pytest.fixture
def coarse_tol():
    return Tolerance(abs_tol=1e-9, rel_tol=1e-6, max_depth=3)


@pytest.fixture
def line_maps():
    return [
        corpus.identity_map(),
        corpus.affine_map(2.0, 0.5),
        corpus.power_map(1.5),
        corpus.power_map(3.0),
        corpus.piecewise_linear_map(2.0),
    ]


@pytest.fixture
def circle_maps():
    return [
        corpus.circle_smooth_map(0.3),
        corpus.circle_smooth_map(-0.6),
        corpus.circle_cubic_map(),
        corpus.rotation_map(0.25),
    ]


@pytest.fixture
def weierstrass():
    return corpus.weierstrass_field(12)


@pytest.fixture
def rng():
    return np.random.default_rng(20240229)


@pytest.fixture
def bump_grid():
    """Fine panels over [-4, 4] x (0, 4]; enough for bumps supported well inside it."""
    return HalfPlaneGrid.symmetric(4.0, 1e-3, y_max=4.0, max_dx=0.0625, max_dy=0.0625)
