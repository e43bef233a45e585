"""Initial-condition presets.

Random fields come from ``numpy.random.Generator(PCG64(seed))``.  Noise is a
sum of Fourier modes with ``max(|k_x|, |k_y|) <= modes``; the generator draws
two standard normals (cosine and sine amplitude) per mode, visiting modes with
``k_x = 0..modes`` in the outer loop and ``k_y = -modes..modes`` in the inner
loop over one half-plane.  The stream therefore does not depend on the grid
size, and the same seed gives the same continuous field on every grid.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError
from ..model import FlowState
from ..navier_stokes import galerkin_truncate
from ..spectral import (
    Grid,
    SpectralField,
    SpectralVectorField,
    dealias,
    forward_transform,
    leray_project,
)
from .config import ICConfig, RunConfig

MAX_INITIAL_PHI = 1.0 - 1e-6


def smooth_noise(grid: Grid, seed: int, modes: int) -> np.ndarray:
    """Band-limited random field on grid samples.

    The field is divided by the sum of the absolute amplitudes, so |f| <= 1
    everywhere and the normalization does not depend on the grid.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    X, Y = grid.mesh
    out = np.zeros((grid.n, grid.n))
    bound = 0.0
    for kx in range(0, modes + 1):
        for ky in range(-modes, modes + 1):
            if kx == 0 and ky <= 0:
                continue
            a, b = rng.standard_normal(2)
            arg = kx * X + ky * Y
            out += a * np.cos(arg) + b * np.sin(arg)
            bound += abs(a) + abs(b)
    return out / bound


def taylor_green(grid: Grid, amplitude: float = 1.0) -> SpectralVectorField:
    X, Y = grid.mesh
    return SpectralVectorField.from_samples(
        amplitude * np.sin(X) * np.cos(Y), -amplitude * np.cos(X) * np.sin(Y), grid
    )


def initial_fields(ic: ICConfig, grid: Grid):
    X, Y = grid.mesh
    ux = uy = np.zeros((grid.n, grid.n))
    if ic.preset == "spinodal":
        phi = ic.mean + ic.amplitude * smooth_noise(grid, ic.seed, ic.modes)
    elif ic.preset == "taylor_green":
        ux = ic.u_amplitude * np.sin(X) * np.cos(Y)
        uy = -ic.u_amplitude * np.cos(X) * np.sin(Y)
        if ic.profile == "band":
            phi = ic.mean + ic.amplitude * np.tanh(np.cos(Y) / ic.width)
        else:
            phi = np.full_like(X, ic.mean)
    elif ic.preset == "bubble":
        r2 = (X - np.pi) ** 2 + (Y - np.pi) ** 2
        phi = 0.95 * np.tanh((ic.radius**2 - r2) / (2.0 * ic.radius * ic.width))
    else:  # smooth
        phi = ic.mean + ic.amplitude * (np.cos(X) * np.cos(Y) + 0.5 * np.sin(X + 2 * Y))
        ux = ic.u_amplitude * (np.sin(X) * np.cos(Y) + 0.5 * np.cos(2 * Y))
        uy = -ic.u_amplitude * np.cos(X) * np.sin(Y)
    if ic.perturbation:
        phi = phi + ic.perturbation * np.cos(X)
    return phi, ux, uy


def initial_state(cfg: RunConfig) -> FlowState:
    grid = Grid(cfg.n)
    phi_s, ux, uy = initial_fields(cfg.ic, grid)
    phi = dealias(forward_transform(phi_s, grid))
    u = leray_project(SpectralVectorField.from_samples(ux, uy, grid))
    u = SpectralVectorField(dealias(u.x), dealias(u.y))
    if cfg.ns.galerkin_m is not None:
        u = galerkin_truncate(u, cfg.ns.galerkin_m)
    check_initial(phi)
    return FlowState.initial(u, phi, cfg.fluid)


def check_initial(phi: SpectralField) -> None:
    worst = float(np.max(np.abs(phi.samples())))
    if worst > MAX_INITIAL_PHI:
        raise ConfigurationError(
            f"initial phi must satisfy max|phi| <= 1 - 1e-6, got {worst:.12g}"
        )
    if abs(phi.coeffs[0, 0].real) >= 1:
        raise ConfigurationError("initial phi must have |mean| < 1")
