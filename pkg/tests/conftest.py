import numpy as np
import pytest

from aggsim.spectral import Grid, SpectralField, SpectralVectorField, leray_project


def band_limited(grid: Grid, rng, kmax: int = 5, amplitude: float = 1.0) -> SpectralField:
    """Random real field with modes max(|kx|,|ky|) <= kmax and zero mean."""
    X, Y = grid.mesh
    out = np.zeros((grid.n, grid.n))
    for kx in range(0, kmax + 1):
        for ky in range(-kmax, kmax + 1):
            if kx == 0 and ky <= 0:
                continue
            a, b = rng.standard_normal(2)
            out += a * np.cos(kx * X + ky * Y) + b * np.sin(kx * X + ky * Y)
    out *= amplitude / np.max(np.abs(out))
    return SpectralField.from_samples(out, grid)


def solenoidal(grid: Grid, rng, kmax: int = 5, amplitude: float = 1.0) -> SpectralVectorField:
    v = SpectralVectorField(
        band_limited(grid, rng, kmax, amplitude), band_limited(grid, rng, kmax, amplitude)
    )
    return leray_project(v)


@pytest.fixture
def grid():
    return Grid(32)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
