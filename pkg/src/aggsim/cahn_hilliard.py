"""Implicit convex-splitting step for the convective Cahn-Hilliard subsystem.

One step solves, on the dealiased Fourier modes,

    (phi - phi_n)/dt + div(u_n phi_n) = Lap mu,
    mu = -Lap phi + F'(phi) - theta0 phi_n,

with Newton's method.  The Jacobian ``I + dt Lap^2 - dt Lap (F''(phi) .)`` is
symmetric positive definite in the H^-1 inner product on zero-mean fields, so
the Newton corrections are computed by preconditioned conjugate gradients in
that inner product.  The ``k = 0`` mode of the residual is ``mean(phi) -
mean(phi_n)`` and is handled separately, which keeps the mean exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, PhaseBoundError, StepFailure
from .model import FluidParams
from .spectral import (
    AREA,
    Grid,
    SpectralField,
    SpectralVectorField,
    to_coeffs,
    to_samples,
)

# Newton iterates must stay inside (-INTERIOR, INTERIOR)
INTERIOR = 1.0 - 1e-13


@dataclass(frozen=True)
class CHStepConfig:
    dt: float
    newton_tol: float = 1e-10
    max_newton: int = 50
    max_backtrack: int = 40
    linsolve_tol: float = 1e-12
    max_linear_iter: int = 1000

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        for name in ("newton_tol", "linsolve_tol"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.max_newton < 1 or self.max_backtrack < 0:
            raise ConfigurationError("iteration caps must be positive")


@dataclass
class CHStepReport:
    newton_iters: int = 0
    final_residual: float = math.nan
    backtracks: int = 0
    linear_iters: int = 0
    residuals: list[float] = field(default_factory=list)


def _l2(c: np.ndarray) -> float:
    return math.sqrt(AREA * float(np.sum(c.real**2 + c.imag**2)))


def transport_term(phi_n: SpectralField, u_n: SpectralVectorField) -> SpectralField:
    """div(u phi), dealiased; its mean is exactly zero."""
    g = phi_n.grid
    s = phi_n.samples()
    ux, uy = u_n.samples()
    fx = to_coeffs(ux * s) * g.dealias_mask
    fy = to_coeffs(uy * s) * g.dealias_mask
    return SpectralField(g, g.ikx * fx + g.iky * fy)


class _System:
    """Residual and Jacobian of one convex-splitting step on raw coefficient arrays."""

    def __init__(self, grid: Grid, phi_n: np.ndarray, transport: np.ndarray, p, dt):
        self.g = grid
        self.p = p
        self.dt = dt
        self.mask = grid.dealias_mask
        self.k2 = grid.k2 * self.mask
        self.k4 = self.k2**2
        self.phi_n = phi_n
        # everything in the residual that does not depend on the unknown
        self.const = (-phi_n + dt * transport - dt * self.k2 * p.theta0 * phi_n) * self.mask

    def convex_force(self, samples):
        return to_coeffs(self.p.theta * np.arctanh(samples)) * self.mask

    def residual(self, c, samples):
        dt = self.dt
        return (c + dt * self.k4 * c) * self.mask + dt * self.k2 * self.convex_force(
            samples
        ) + self.const

    def jacobian(self, v, d2f):
        dt = self.dt
        w = to_coeffs(d2f * to_samples(v)) * self.mask
        return (v + dt * self.k4 * v) * self.mask + dt * self.k2 * w

    def solve(self, rhs, d2f, tol, max_iter):
        """PCG for J x = rhs on zero-mean dealiased modes, H^-1 inner product."""
        g = self.g
        weight = g.inv_k2 * self.mask
        gamma = float(d2f.max())
        precond = 1.0 / (1.0 + self.dt * self.k4 + self.dt * gamma * self.k2)

        def dot(a, b):
            return float(np.sum(weight * (a.real * b.real + a.imag * b.imag)))

        b = rhs * self.mask
        b[0, 0] = 0.0
        x = np.zeros_like(b)
        r = b.copy()
        bnorm = math.sqrt(dot(b, b))
        if bnorm == 0.0:
            return x, 0
        z = precond * r
        d = z.copy()
        rz = dot(r, z)
        for it in range(1, max_iter + 1):
            jd = self.jacobian(d, d2f)
            jd[0, 0] = 0.0
            alpha = rz / dot(d, jd)
            x += alpha * d
            r -= alpha * jd
            if math.sqrt(dot(r, r)) <= tol * bnorm:
                return x, it
            z = precond * r
            rz_new = dot(r, z)
            d = z + (rz_new / rz) * d
            rz = rz_new
        raise StepFailure(f"inner linear solve did not converge in {max_iter} iterations")


def residual(phi, phi_n, transport, p: FluidParams, dt: float) -> SpectralField:
    """R(phi) = phi - phi_n + dt div(u phi_n) - dt Lap(-Lap phi + F'(phi) - theta0 phi_n)."""
    sys = _System(phi.grid, phi_n.coeffs, transport.coeffs, p, dt)
    return SpectralField(phi.grid, sys.residual(phi.coeffs, phi.samples()))


def jacobian_action(phi: SpectralField, v: SpectralField, p: FluidParams, dt: float):
    """Directional derivative of the residual at ``phi`` along ``v``."""
    g = phi.grid
    sys = _System(g, np.zeros_like(phi.coeffs), np.zeros_like(phi.coeffs), p, dt)
    s = phi.samples()
    d2f = p.theta / (1.0 - s * s)
    return SpectralField(g, sys.jacobian(v.coeffs, d2f))


def newton_solve(phi_guess, phi_n, transport, p: FluidParams, cfg: CHStepConfig):
    g = phi_guess.grid
    sys = _System(g, phi_n.coeffs, transport.coeffs, p, cfg.dt)
    report = CHStepReport()

    c = phi_guess.coeffs * sys.mask
    s = to_samples(c)
    if np.max(np.abs(s)) >= INTERIOR:
        raise PhaseBoundError("Newton guess is not strictly inside (-1, 1)")
    res = sys.residual(c, s)
    rnorm = _l2(res)
    report.residuals.append(rnorm)

    while rnorm > cfg.newton_tol:
        if report.newton_iters >= cfg.max_newton:
            report.final_residual = rnorm
            raise StepFailure(
                f"Newton did not converge in {cfg.max_newton} iterations "
                f"(residual {rnorm:.3e})",
                report,
            )
        d2f = p.theta / (1.0 - s * s)
        delta, lin_iters = sys.solve(-res, d2f, cfg.linsolve_tol, cfg.max_linear_iter)
        delta[0, 0] = -res[0, 0]
        report.linear_iters += lin_iters

        step = 1.0
        for _ in range(cfg.max_backtrack + 1):
            trial = c + step * delta
            trial_s = to_samples(trial)
            if np.max(np.abs(trial_s)) < INTERIOR:
                break
            step *= 0.5
            report.backtracks += 1
        else:
            report.final_residual = rnorm
            raise StepFailure("damping could not keep the Newton iterate inside (-1, 1)", report)

        c, s = trial, trial_s
        res = sys.residual(c, s)
        rnorm = _l2(res)
        report.newton_iters += 1
        report.residuals.append(rnorm)

    report.final_residual = rnorm
    return SpectralField(g, c), report


def ch_step(phi_n: SpectralField, u_n: SpectralVectorField, p: FluidParams, cfg: CHStepConfig):
    """Advance phi by one step; returns (phi_next, mu_next, report)."""
    g = phi_n.grid
    transport = transport_term(phi_n, u_n)
    phi_next, report = newton_solve(phi_n, phi_n, transport, p, cfg)
    s = phi_next.samples()
    mu = (
        -g.lap_symbol * phi_next.coeffs
        + to_coeffs(p.theta * np.arctanh(s)) * g.dealias_mask
        - p.theta0 * phi_n.coeffs
    )
    return phi_next, SpectralField(g, mu), report
