import numpy as np
import pytest

from lcfpca.bspline_basis import build_basis
from lcfpca.phase_fold import phase_grid


@pytest.fixture(scope="session")
def small_basis():
    """12-point basis: cheap enough for pure-Python oracle comparisons."""
    return build_basis(phase_grid(12))


@pytest.fixture(scope="session")
def medium_basis():
    """40-point basis used for smoothing and FPCA oracle tests."""
    return build_basis(phase_grid(40))


@pytest.fixture(scope="session")
def full_basis():
    """The production-size 272-point basis."""
    return build_basis(phase_grid(272))


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
