"""Per-step functionals: energies, dissipation, conservation, norms, H and X."""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

import numpy as np

from .errors import ConfigurationError
from .model import (
    FlowState,
    FluidParams,
    chemical_potential,
    density_samples,
    dissipation,
    quadrature,
    total_energy,
    strain_rate_squared,
    viscosity_samples,
)
from .spectral import (
    AREA,
    SpectralField,
    gradient,
    sobolev_norm,
    vector_sobolev_norm,
)


@dataclass(frozen=True)
class DiagnosticsRecord:
    step: int
    t: float
    E_total: float
    E_kin: float
    E_free: float
    D_visc: float
    D_mu: float
    mass_phi: float
    mom_x: float
    mom_y: float
    max_abs_phi: float
    H1_u: float
    H1_mu: float
    H2_phi: float
    H3_phi: float
    H3_mu: float
    L2_P: float
    H_func: float
    X_func: float
    energy_residual: float | None
    ratio_phiH2: float
    ratio_muH1: float
    newton_iters: int
    pcg_iters: int

    @property
    def momentum(self) -> tuple[float, float]:
        return (self.mom_x, self.mom_y)

    def to_row(self) -> list[str]:
        out = []
        for value in astuple(self):
            if value is None:
                out.append("")
            elif isinstance(value, (int, np.integer)):
                out.append(str(int(value)))
            else:
                out.append(f"{value:.17g}")
        return out


CSV_COLUMNS = tuple(f.name for f in fields(DiagnosticsRecord))


def _grad_norm_sq(f: SpectralField) -> float:
    g = f.grid
    return float(AREA * np.sum(g.k2 * g.derivative_mask * np.abs(f.coeffs) ** 2))


def _coupling(state: FlowState, mu: SpectralField) -> float:
    """int mu (u . grad phi), by pointwise evaluation on the grid."""
    gp = gradient(state.phi)
    ux, uy = state.u.samples()
    return quadrature(mu.samples() * (ux * gp.x.samples() + uy * gp.y.samples()))


def _mu(state: FlowState, p: FluidParams) -> SpectralField:
    return chemical_potential(state.phi, p)


def h_functional(state: FlowState, p: FluidParams, mu: SpectralField | None = None):
    """Returns (H, lower surrogate) with
    H = 1/2 int nu|Du|^2 + 1/2 int |grad mu|^2 + int mu (u . grad phi)
    and the surrogate 1/4 int nu|Du|^2 + 1/4 ||grad mu||^2.
    """
    mu = _mu(state, p) if mu is None else mu
    nu = viscosity_samples(state.phi.samples(), p)
    visc = quadrature(nu * strain_rate_squared(state.u))
    gmu = _grad_norm_sq(mu)
    h = 0.5 * visc + 0.5 * gmu + _coupling(state, mu)
    return h, 0.25 * visc + 0.25 * gmu


def x_functional(state: FlowState, p: FluidParams, mu: SpectralField | None = None) -> float:
    """X = 1/2 int |grad mu|^2 + int mu (u . grad phi)."""
    mu = _mu(state, p) if mu is None else mu
    return 0.5 * _grad_norm_sq(mu) + _coupling(state, mu)


def estimate_ratios(state: FlowState, p: FluidParams, mu: SpectralField | None = None):
    """(||phi||_H2 / (1 + ||grad mu||^(1/2)), ||mu||_H1 / (1 + ||grad mu||))."""
    mu = _mu(state, p) if mu is None else mu
    gmu = math.sqrt(_grad_norm_sq(mu))
    return (
        sobolev_norm(state.phi, 2) / (1.0 + math.sqrt(gmu)),
        sobolev_norm(mu, 1) / (1.0 + gmu),
    )


def continuous_dependence_metric(a: FlowState, b: FlowState, p: FluidParams | None = None) -> float:
    """||u_a - u_b||^2_L2 + ||phi_a - phi_b||^2_H1."""
    if a.grid != b.grid:
        raise ConfigurationError("states live on different grids")
    du = a.u - b.u
    dphi = a.phi - b.phi
    return vector_sobolev_norm(du, 0) ** 2 + sobolev_norm(dphi, 1) ** 2


def momentum(state: FlowState, p: FluidParams) -> tuple[float, float]:
    """int rho(phi) u."""
    rho = density_samples(state.phi.samples(), p)
    ux, uy = state.u.samples()
    return quadrature(rho * ux), quadrature(rho * uy)


def record(
    state: FlowState,
    prev: DiagnosticsRecord | None,
    p: FluidParams,
    dt: float | None = None,
    step: int = 0,
    newton_iters: int = 0,
    pcg_iters: int = 0,
) -> DiagnosticsRecord:
    """Evaluate every monitored functional at ``state``.

    ``dt`` is the time elapsed since ``prev``; it defaults to the difference of
    the two time stamps.  The chemical potential is recomputed from ``phi``.
    """
    mu = _mu(state, p)
    probe = FlowState(state.time, state.u, state.phi, mu=mu, pressure=state.pressure)
    e_total, e_kin, e_free = total_energy(probe, p)
    d_visc, d_mu = dissipation(probe, p)
    mom_x, mom_y = momentum(state, p)
    coupling = _coupling(state, mu)
    ratio_phi, ratio_mu = estimate_ratios(state, p, mu)

    residual = None
    if prev is not None:
        elapsed = state.time - prev.t if dt is None else dt
        residual = e_total - prev.E_total + elapsed * (d_visc + d_mu)

    return DiagnosticsRecord(
        step=step,
        t=state.time,
        E_total=e_total,
        E_kin=e_kin,
        E_free=e_free,
        D_visc=d_visc,
        D_mu=d_mu,
        mass_phi=float(state.phi.coeffs[0, 0].real),
        mom_x=mom_x,
        mom_y=mom_y,
        max_abs_phi=float(np.max(np.abs(state.phi.samples()))),
        H1_u=vector_sobolev_norm(state.u, 1),
        H1_mu=sobolev_norm(mu, 1),
        H2_phi=sobolev_norm(state.phi, 2),
        H3_phi=sobolev_norm(state.phi, 3),
        H3_mu=sobolev_norm(mu, 3),
        L2_P=sobolev_norm(state.pressure, 0),
        H_func=0.5 * d_visc + 0.5 * d_mu + coupling,
        X_func=0.5 * d_mu + coupling,
        energy_residual=residual,
        ratio_phiH2=ratio_phi,
        ratio_muH1=ratio_mu,
        newton_iters=newton_iters,
        pcg_iters=pcg_iters,
    )
