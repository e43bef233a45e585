"""Constitutive laws, Flory-Huggins potential, forces and energy functionals."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError, PhaseBoundError
from .spectral import (
    AREA,
    Grid,
    SpectralField,
    SpectralVectorField,
    gradient,
    symmetric_gradient,
    to_coeffs,
)

# the barrier is treated as reached within this distance of |phi| = 1
BARRIER_MARGIN = 1e-12


@dataclass(frozen=True)
class FluidParams:
    """Densities, viscosities and potential temperatures of the mixture."""

    rho1: float = 1.0
    rho2: float = 1.0
    nu1: float = 1.0
    nu2: float = 1.0
    theta: float = 1.0
    theta0: float = 2.0

    def __post_init__(self):
        for name in ("rho1", "rho2", "nu1", "nu2"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ConfigurationError(f"{name} must be positive, got {value}")
        if not (0 < self.theta < self.theta0):
            raise ConfigurationError(
                f"potential needs 0 < theta < theta0, got theta={self.theta}, "
                f"theta0={self.theta0}"
            )

    @property
    def rho_min(self) -> float:
        return min(self.rho1, self.rho2)

    @property
    def rho_max(self) -> float:
        return max(self.rho1, self.rho2)

    @property
    def nu_min(self) -> float:
        return min(self.nu1, self.nu2)

    @property
    def nu_max(self) -> float:
        return max(self.nu1, self.nu2)

    @property
    def drho(self) -> float:
        """Constant derivative rho'(phi) = (rho1 - rho2) / 2."""
        return 0.5 * (self.rho1 - self.rho2)

    def as_tuple(self) -> tuple[float, ...]:
        return (self.rho1, self.rho2, self.nu1, self.nu2, self.theta, self.theta0)


@dataclass(eq=False)
class FlowState:
    """Velocity and order parameter at one instant, with cached mu and P.

    ``source`` optionally holds the grid samples (phi, u_x, u_y) the
    coefficients were derived from; checkpoints store these so that a restored
    state has bit-identical coefficients.
    """

    time: float
    u: SpectralVectorField
    phi: SpectralField
    mu: SpectralField | None = None
    pressure: SpectralField | None = None
    source: tuple[np.ndarray, np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.u.grid != self.phi.grid:
            raise ConfigurationError("velocity and phase field live on different grids")
        if self.pressure is None:
            self.pressure = SpectralField.zeros(self.grid)

    @classmethod
    def initial(cls, u, phi, p: "FluidParams", time: float = 0.0) -> "FlowState":
        return cls(time, u, phi, mu=chemical_potential(phi, p))

    @property
    def grid(self) -> Grid:
        return self.phi.grid


class PotentialValues(NamedTuple):
    psi: np.ndarray
    dpsi: np.ndarray
    f: np.ndarray
    df: np.ndarray
    d2f: np.ndarray


def _check_interior(s: np.ndarray, margin: float = 0.0) -> None:
    worst = float(np.max(np.abs(s))) if s.size else 0.0
    if not np.all(np.isfinite(s)) or worst >= 1.0 - margin:
        raise PhaseBoundError(f"order parameter reached the barrier: max|phi| = {worst!r}")


def convex_part(s):
    """F(s) = theta/2 [(1+s) log(1+s) + (1-s) log(1-s)] without the theta factor."""
    return 0.5 * ((1 + s) * np.log1p(s) + (1 - s) * np.log1p(-s))


def potential_values(s, p: FluidParams) -> PotentialValues:
    s = np.asarray(s, dtype=float)
    _check_interior(s)
    f = p.theta * convex_part(s)
    df = p.theta * np.arctanh(s)
    d2f = p.theta / (1.0 - s * s)
    return PotentialValues(
        psi=f - 0.5 * p.theta0 * s * s,
        dpsi=df - p.theta0 * s,
        f=f,
        df=df,
        d2f=d2f,
    )


def psi(s, p: FluidParams):
    return p.theta * convex_part(s) - 0.5 * p.theta0 * s * s


def dpsi(s, p: FluidParams):
    return p.theta * np.arctanh(s) - p.theta0 * s


def _affine(phi: SpectralField, a: float, b: float) -> SpectralField:
    _check_interior(phi.samples(), margin=-np.finfo(float).eps)
    c = 0.5 * (a - b) * phi.coeffs
    c[0, 0] += 0.5 * (a + b)
    return SpectralField(phi.grid, c)


def density(phi: SpectralField, p: FluidParams) -> SpectralField:
    """rho(phi) = rho1 (1 + phi)/2 + rho2 (1 - phi)/2; |phi| <= 1 is required."""
    return _affine(phi, p.rho1, p.rho2)


def viscosity(phi: SpectralField, p: FluidParams) -> SpectralField:
    return _affine(phi, p.nu1, p.nu2)


def density_samples(phi_samples: np.ndarray, p: FluidParams) -> np.ndarray:
    return 0.5 * (p.rho1 + p.rho2) + p.drho * phi_samples


def viscosity_samples(phi_samples: np.ndarray, p: FluidParams) -> np.ndarray:
    return 0.5 * (p.nu1 + p.nu2) + 0.5 * (p.nu1 - p.nu2) * phi_samples


def chemical_potential(phi: SpectralField, p: FluidParams) -> SpectralField:
    """mu = -Lap phi + Psi'(phi), the potential evaluated on samples and dealiased."""
    s = phi.samples()
    _check_interior(s, BARRIER_MARGIN)
    g = phi.grid
    nonlinear = to_coeffs(dpsi(s, p)) * g.dealias_mask
    return SpectralField(g, -g.lap_symbol * phi.coeffs + nonlinear)


def diffusive_flux(mu: SpectralField, p: FluidParams) -> SpectralVectorField:
    """J = -(rho1 - rho2)/2 grad mu."""
    return gradient(mu) * (-p.drho)


def capillary_force(phi: SpectralField, mu: SpectralField) -> SpectralVectorField:
    """mu grad phi, the capillary force modulo a gradient absorbed into pressure."""
    g = phi.grid
    m = mu.samples()
    grad_phi = gradient(phi)
    fx = to_coeffs(m * grad_phi.x.samples()) * g.dealias_mask
    fy = to_coeffs(m * grad_phi.y.samples()) * g.dealias_mask
    return SpectralVectorField(SpectralField(g, fx), SpectralField(g, fy))


def korteweg_force(phi: SpectralField) -> SpectralVectorField:
    """-div(grad phi (x) grad phi), evaluated pseudo-spectrally."""
    g = phi.grid
    gp = gradient(phi)
    px, py = gp.x.samples(), gp.y.samples()
    sxx = to_coeffs(px * px) * g.dealias_mask
    sxy = to_coeffs(px * py) * g.dealias_mask
    syy = to_coeffs(py * py) * g.dealias_mask
    return SpectralVectorField(
        SpectralField(g, -(g.ikx * sxx + g.iky * sxy)),
        SpectralField(g, -(g.ikx * sxy + g.iky * syy)),
    )


def strain_rate_squared(u: SpectralVectorField) -> np.ndarray:
    """|D u|^2 on grid samples."""
    (d11, d12), (_, d22) = symmetric_gradient(u)
    a, b, c = d11.samples(), d12.samples(), d22.samples()
    return a * a + 2 * b * b + c * c


def quadrature(samples: np.ndarray) -> float:
    """Integral over the torus from grid samples (exact for band-limited data)."""
    return float(AREA * samples.mean())


def total_energy(state: FlowState, p: FluidParams) -> tuple[float, float, float]:
    """(E_total, E_kin, E_free) with E = int rho|u|^2/2 + int |grad phi|^2/2 + Psi(phi)."""
    phi_s = state.phi.samples()
    _check_interior(phi_s)
    ux, uy = state.u.samples()
    rho = density_samples(phi_s, p)
    e_kin = quadrature(0.5 * rho * (ux * ux + uy * uy))
    gp = gradient(state.phi)
    gx, gy = gp.x.samples(), gp.y.samples()
    e_free = quadrature(0.5 * (gx * gx + gy * gy) + psi(phi_s, p))
    return e_kin + e_free, e_kin, e_free


def dissipation(state: FlowState, p: FluidParams) -> tuple[float, float]:
    """(int nu(phi)|Du|^2, int |grad mu|^2)."""
    nu = viscosity_samples(state.phi.samples(), p)
    d_visc = quadrature(nu * strain_rate_squared(state.u))
    mu = state.mu if state.mu is not None else chemical_potential(state.phi, p)
    g = mu.grid
    d_mu = float(AREA * np.sum(g.k2 * g.derivative_mask * np.abs(mu.coeffs) ** 2))
    return d_visc, d_mu

