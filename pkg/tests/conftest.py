import numpy as np
import pytest

from flowsr import ComplexVolume, Grid3, ScalarVolume


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_complex(grid: Grid3, rng: np.random.Generator) -> ComplexVolume:
    return ComplexVolume(
        grid, rng.standard_normal(grid.dims) + 1j * rng.standard_normal(grid.dims)
    )


def random_scalar(grid: Grid3, rng: np.random.Generator) -> ScalarVolume:
    return ScalarVolume(grid, rng.standard_normal(grid.dims))


def rel_err(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))
