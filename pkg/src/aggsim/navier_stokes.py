"""Semi-implicit step of the variable-density momentum equation.

The momentum equation is advanced in non-conservative form

    rho (u* - u_n)/dt = -rho (u_n . grad) u_n + rho' (grad mu . grad) u_n
                        + div(nu D u) + mu grad phi,

followed by the variable-density projection ``div((dt/rho) grad P) = div u*``,
``u = u* - (dt/rho) grad P``.  The capillary force is taken as ``mu grad phi``,
so the returned pressure also carries ``|grad phi|^2/2 + Psi(phi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import CFLViolation, ConfigurationError, PressureSolveError
from .model import FluidParams, _check_interior, density_samples, viscosity_samples
from .spectral import AREA, Grid, SpectralField, SpectralVectorField, to_coeffs, to_samples

VISCOUS_MODES = ("explicit", "semi_implicit")


@dataclass(frozen=True)
class NSStepConfig:
    dt: float
    viscous_mode: str = "semi_implicit"
    pressure_tol: float = 1e-11
    pressure_max_iter: int = 500
    galerkin_m: int | None = None
    flux_correction: bool = True
    check_cfl: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if self.viscous_mode not in VISCOUS_MODES:
            raise ConfigurationError(
                f"viscous_mode must be one of {VISCOUS_MODES}, got {self.viscous_mode!r}"
            )
        if not self.pressure_tol > 0 or self.pressure_max_iter < 1:
            raise ConfigurationError("pressure tolerance and iteration cap must be positive")
        if self.galerkin_m is not None and self.galerkin_m < 1:
            raise ConfigurationError(f"galerkin_m must be >= 1, got {self.galerkin_m}")


class NSStepResult(NamedTuple):
    u: SpectralVectorField
    pressure: SpectralField
    pressure_iters: int


class PressureSolution(NamedTuple):
    pressure: SpectralField
    iterations: int
    residual: float


def _l2(c: np.ndarray) -> float:
    return math.sqrt(AREA * float(np.sum(c.real**2 + c.imag**2)))


def _weighted_gradient(g: Grid, p_hat: np.ndarray, b: np.ndarray):
    """Dealiased coefficients of b grad P."""
    gx = to_coeffs(b * to_samples(g.ikx * p_hat)) * g.dealias_mask
    gy = to_coeffs(b * to_samples(g.iky * p_hat)) * g.dealias_mask
    return gx, gy


def _apply(g: Grid, p_hat: np.ndarray, b: np.ndarray) -> np.ndarray:
    gx, gy = _weighted_gradient(g, p_hat, b)
    return g.ikx * gx + g.iky * gy


def pressure_operator(pressure: SpectralField, rho: SpectralField) -> SpectralField:
    """div((1/rho) grad P) with the flux dealiased."""
    g = pressure.grid
    return SpectralField(g, _apply(g, pressure.coeffs, 1.0 / rho.samples()))


def solve_pressure(rhs_div: SpectralField, rho: SpectralField, cfg: NSStepConfig) -> PressureSolution:
    """Solve div((1/rho) grad P) = rhs with mean(P) = 0 by preconditioned CG.

    The preconditioner is the constant-coefficient inverse built from the mean
    density.  The right-hand side is restricted to the dealiased modes, which is
    the range of the discrete operator.
    """
    g = rhs_div.grid
    if abs(rhs_div.coeffs[0, 0]) > 1e-13:
        raise ConfigurationError(
            f"pressure right-hand side must have zero mean, got {rhs_div.coeffs[0, 0].real:.3e}"
        )
    rho_s = rho.samples()
    if rho_s.min() <= 0:
        raise ConfigurationError("density must be positive for the pressure solve")
    b = 1.0 / rho_s
    precond = float(rho_s.mean()) * g.inv_k2 * g.dealias_mask

    # SPD form: (-A) P = -rhs
    rhs = -rhs_div.coeffs * g.dealias_mask
    rhs[0, 0] = 0.0
    x = np.zeros_like(rhs)
    if _l2(rhs) <= cfg.pressure_tol:
        return PressureSolution(SpectralField(g, x), 0, _l2(rhs))

    def dot(a, c):
        return float(np.sum(a.real * c.real + a.imag * c.imag))

    r = rhs.copy()
    z = precond * r
    d = z.copy()
    rz = dot(r, z)
    for it in range(1, cfg.pressure_max_iter + 1):
        ad = -_apply(g, d, b)
        alpha = rz / dot(d, ad)
        x += alpha * d
        r -= alpha * ad
        if _l2(r) <= cfg.pressure_tol:
            # confirm against the true residual before accepting
            r = rhs + _apply(g, x, b)
            res = _l2(r)
            if res <= cfg.pressure_tol:
                x[0, 0] = 0.0
                return PressureSolution(SpectralField(g, x), it, res)
            z = precond * r
            d = z.copy()
            rz = dot(r, z)
            continue
        z = precond * r
        rz_new = dot(r, z)
        d = z + (rz_new / rz) * d
        rz = rz_new
    raise PressureSolveError(
        f"pressure solve did not converge in {cfg.pressure_max_iter} iterations "
        f"(residual {_l2(r):.3e})"
    )


def pressure_solve(rhs_div: SpectralField, rho: SpectralField, cfg: NSStepConfig) -> SpectralField:
    return solve_pressure(rhs_div, rho, cfg).pressure


@lru_cache(maxsize=None)
def stokes_eigenvalue(m: int) -> int:
    """m-th distinct nonzero value of |k|^2 over the integer lattice."""
    if m < 1:
        raise ConfigurationError(f"eigenvalue index must be >= 1, got {m}")
    size = 8
    while True:
        values = sorted({a * a + b * b for a in range(size) for b in range(size)} - {0})
        complete = [v for v in values if v <= (size - 1) ** 2]
        if len(complete) >= m:
            return complete[m - 1]
        size *= 2


def galerkin_truncate(u: SpectralVectorField, m: int) -> SpectralVectorField:
    """Keep the constant mode and the Fourier modes with |k|^2 up to the m-th eigenvalue."""
    g = u.grid
    keep = g.k2 <= stokes_eigenvalue(m)
    return SpectralVectorField(
        SpectralField(g, u.x.coeffs * keep), SpectralField(g, u.y.coeffs * keep)
    )


def ns_step(
    u_n: SpectralVectorField,
    phi_next: SpectralField,
    mu_next: SpectralField,
    p: FluidParams,
    cfg: NSStepConfig,
) -> NSStepResult:
    g = u_n.grid
    dt = cfg.dt
    mask = g.dealias_mask

    phi_s = phi_next.samples()
    _check_interior(phi_s)
    rho = density_samples(phi_s, p)
    nu = viscosity_samples(phi_s, p)

    ux_c, uy_c = u_n.x.coeffs, u_n.y.coeffs
    ux, uy = to_samples(ux_c), to_samples(uy_c)

    if cfg.check_cfl:
        umax = float(np.sqrt(ux * ux + uy * uy).max())
        if umax > 0 and dt > 0.5 * g.h / umax:
            raise CFLViolation(f"advective CFL violated: dt={dt:.3e}, max|u|={umax:.3e}")
        if cfg.viscous_mode == "explicit" and dt > 0.25 * g.h**2 * p.rho_min / p.nu_max:
            raise CFLViolation(f"explicit viscous limit violated: dt={dt:.3e}")

    dxux, dyux = to_samples(g.ikx * ux_c), to_samples(g.iky * ux_c)
    dxuy, dyuy = to_samples(g.ikx * uy_c), to_samples(g.iky * uy_c)

    mu_s = mu_next.samples()
    fx = -rho * (ux * dxux + uy * dyux) + mu_s * to_samples(g.ikx * phi_next.coeffs)
    fy = -rho * (ux * dxuy + uy * dyuy) + mu_s * to_samples(g.iky * phi_next.coeffs)

    if cfg.flux_correction:
        mx = to_samples(g.ikx * mu_next.coeffs)
        my = to_samples(g.iky * mu_next.coeffs)
        fx = fx + p.drho * (mx * dxux + my * dyux)
        fy = fy + p.drho * (mx * dxuy + my * dyuy)

    s11 = to_coeffs(nu * dxux) * mask
    s22 = to_coeffs(nu * dyuy) * mask
    s12 = to_coeffs(nu * 0.5 * (dyux + dxuy)) * mask
    fx = fx + to_samples(g.ikx * s11 + g.iky * s12)
    fy = fy + to_samples(g.ikx * s12 + g.iky * s22)

    ax = to_coeffs(fx / rho) * mask
    ay = to_coeffs(fy / rho) * mask

    if cfg.viscous_mode == "semi_implicit":
        # constant-coefficient implicit part; bounds nu/(2 rho) from above
        kappa = 0.5 * p.nu_max / p.rho_min
        factor = dt / (1.0 + dt * kappa * g.k2)
    else:
        factor = dt
    sx = (ux_c + factor * ax) * mask
    sy = (uy_c + factor * ay) * mask

    rhs = SpectralField(g, (g.ikx * sx + g.iky * sy) / dt)
    rhs.coeffs[0, 0] = 0.0
    rho_field = SpectralField(g, to_coeffs(rho))
    sol = solve_pressure(rhs, rho_field, cfg)
    gx, gy = _weighted_gradient(g, sol.pressure.coeffs, 1.0 / rho)

    u_next = SpectralVectorField(SpectralField(g, sx - dt * gx), SpectralField(g, sy - dt * gy))
    if cfg.galerkin_m is not None:
        u_next = galerkin_truncate(u_next, cfg.galerkin_m)
    return NSStepResult(u_next, sol.pressure, sol.iterations)
