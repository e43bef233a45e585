import numpy as np
import pytest
from dataclasses import replace
from hypothesis import given, settings
from hypothesis import strategies as st

from aggsim.errors import CFLViolation, ConfigurationError
from aggsim.harness import preset_config, trajectory
from aggsim.model import FluidParams, chemical_potential
from aggsim.navier_stokes import (
    NSStepConfig,
    galerkin_truncate,
    ns_step,
    pressure_operator,
    pressure_solve,
    solve_pressure,
    stokes_eigenvalue,
)
from aggsim.spectral import (
    Grid,
    SpectralField,
    SpectralVectorField,
    dealias,
    divergence,
    forward_transform,
    l2_inner,
    leray_project,
    sobolev_norm,
    vector_sobolev_norm,
)

from conftest import band_limited, solenoidal


def random_density(grid, rng, lo, hi, kmax=4):
    s = band_limited(grid, rng, kmax=kmax).samples()
    s = lo + (hi - lo) * (s - s.min()) / (s.max() - s.min())
    return SpectralField.from_samples(s, grid)


def zero_mean_rhs(grid, rng, kmax=8):
    return dealias(band_limited(grid, rng, kmax=kmax))


def taylor_green(grid):
    X, Y = grid.mesh
    return SpectralVectorField.from_samples(np.sin(X) * np.cos(Y), -np.cos(X) * np.sin(Y), grid)


@pytest.mark.parametrize(
    "kwargs", [dict(dt=0.0), dict(dt=1e-3, viscous_mode="implicit"), dict(dt=1e-3, galerkin_m=0)]
)
def test_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        NSStepConfig(**kwargs)


class TestStep:
    def test_uniform_equilibrium(self):
        g = Grid(16)
        p = FluidParams(rho1=1.0, rho2=4.0, nu1=0.3, nu2=1.0)
        u = SpectralVectorField(SpectralField.constant(0.4, g), SpectralField.constant(-0.1, g))
        phi = SpectralField.constant(0.2, g)
        mu = chemical_potential(phi, p)
        for mode in ("explicit", "semi_implicit"):
            out = ns_step(u, phi, mu, p, NSStepConfig(dt=1e-2, viscous_mode=mode))
            assert np.allclose(out.u.x.coeffs, u.x.coeffs, atol=1e-15)
            assert np.allclose(out.u.y.coeffs, u.y.coeffs, atol=1e-15)
            assert np.all(out.pressure.coeffs == 0)

    @pytest.mark.parametrize("mode", ["explicit", "semi_implicit"])
    def test_taylor_green_decay(self, mode):
        g = Grid(32)
        nu, rho, dt = 0.1, 1.0, 1e-3
        p = FluidParams(rho1=rho, rho2=rho, nu1=nu, nu2=nu)
        phi = SpectralField.zeros(g)
        mu = chemical_potential(phi, p)
        u = taylor_green(g)
        n0 = vector_sobolev_norm(u, 0)
        cfg = NSStepConfig(dt=dt, viscous_mode=mode)
        for _ in range(1000):
            u = ns_step(u, phi, mu, p, cfg).u
        ratio = vector_sobolev_norm(u, 0) / n0
        assert ratio == pytest.approx(np.exp(-nu / rho), rel=1e-2)

    def test_flux_term_vanishes_for_matched_density(self, rng):
        g = Grid(32)
        p = FluidParams(rho1=2.0, rho2=2.0, nu1=0.5, nu2=1.0)
        phi = dealias(band_limited(g, rng, kmax=4, amplitude=0.5))
        mu = chemical_potential(phi, p)
        u = solenoidal(g, rng, kmax=4, amplitude=0.5)
        on = ns_step(u, phi, mu, p, NSStepConfig(dt=1e-3, flux_correction=True))
        off = ns_step(u, phi, mu, p, NSStepConfig(dt=1e-3, flux_correction=False))
        assert np.array_equal(on.u.x.coeffs, off.u.x.coeffs)
        assert np.array_equal(on.u.y.coeffs, off.u.y.coeffs)
        assert np.array_equal(on.pressure.coeffs, off.pressure.coeffs)

    def test_projection_is_divergence_free(self, rng):
        g = Grid(32)
        p = FluidParams(rho1=1.0, rho2=10.0, nu1=0.5, nu2=1.0)
        phi = dealias(band_limited(g, rng, kmax=4, amplitude=0.8))
        mu = chemical_potential(phi, p)
        u = solenoidal(g, rng, kmax=4, amplitude=0.5)
        cfg = NSStepConfig(dt=1e-3)
        out = ns_step(u, phi, mu, p, cfg)
        assert sobolev_norm(divergence(out.u), 0) <= cfg.pressure_tol
        assert out.pressure.coeffs[0, 0] == 0

    def test_cfl_guards(self, rng):
        g = Grid(16)
        p = FluidParams(nu1=1.0, nu2=1.0)
        phi = SpectralField.zeros(g)
        mu = chemical_potential(phi, p)
        fast = taylor_green(g) * 10.0
        with pytest.raises(CFLViolation):
            ns_step(fast, phi, mu, p, NSStepConfig(dt=0.1))
        with pytest.raises(CFLViolation):
            ns_step(taylor_green(g) * 1e-3, phi, mu, p, NSStepConfig(dt=0.1, viscous_mode="explicit"))


class TestPressure:
    def test_constant_coefficient(self):
        g = Grid(16)
        X, _ = g.mesh
        rhs = forward_transform(-np.cos(X), g)
        P = pressure_solve(rhs, SpectralField.constant(1.0, g), NSStepConfig(dt=1.0))
        assert np.allclose(P.samples(), np.cos(X), atol=1e-12)

    def test_zero_rhs(self):
        g = Grid(16)
        sol = solve_pressure(SpectralField.zeros(g), SpectralField.constant(1.0, g), NSStepConfig(dt=1.0))
        assert np.all(sol.pressure.coeffs == 0) and sol.iterations == 0

    def test_nonzero_mean_rejected(self):
        g = Grid(16)
        with pytest.raises(ConfigurationError):
            pressure_solve(SpectralField.constant(1e-6, g), SpectralField.constant(1.0, g), NSStepConfig(dt=1.0))

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_forward_residual(self, seed):
        g = Grid(32)
        rng = np.random.default_rng(seed)
        rho = random_density(g, rng, 1.0, 2.0)
        rhs = zero_mean_rhs(g, rng)
        P = pressure_solve(rhs, rho, NSStepConfig(dt=1.0))
        assert sobolev_norm(pressure_operator(P, rho) - rhs, 0) <= 1e-10
        assert P.coeffs[0, 0] == 0

    def test_operator_symmetric(self, rng):
        g = Grid(32)
        rho = random_density(g, rng, 1.0, 50.0)
        for _ in range(5):
            v, w = zero_mean_rhs(g, rng), zero_mean_rhs(g, rng)
            a = l2_inner(pressure_operator(v, rho), w)
            b = l2_inner(v, pressure_operator(w, rho))
            assert abs(a - b) <= 1e-12 * max(1.0, abs(a))
            assert l2_inner(pressure_operator(v, rho), v) < 0


class TestGalerkin:
    def test_eigenvalue_sequence(self):
        assert [stokes_eigenvalue(m) for m in range(1, 9)] == [1, 2, 4, 5, 8, 9, 10, 13]

    def test_large_cutoff_is_identity(self, rng):
        g = Grid(16)
        u = solenoidal(g, rng, kmax=7)
        t = galerkin_truncate(u, 200)
        assert np.array_equal(t.x.coeffs, u.x.coeffs) and np.array_equal(t.y.coeffs, u.y.coeffs)

    def test_constant_kept(self):
        g = Grid(16)
        u = SpectralVectorField(SpectralField.constant(1.5, g), SpectralField.constant(-0.5, g))
        t = galerkin_truncate(u, 1)
        assert np.array_equal(t.x.coeffs, u.x.coeffs) and np.array_equal(t.y.coeffs, u.y.coeffs)

    @pytest.mark.parametrize("m", [1, 2, 8, 18, 32])
    def test_idempotent_and_commutes_with_leray(self, m, rng):
        g = Grid(32)
        v = SpectralVectorField(band_limited(g, rng, 12), band_limited(g, rng, 12))
        once = galerkin_truncate(v, m)
        twice = galerkin_truncate(once, m)
        assert np.array_equal(once.x.coeffs, twice.x.coeffs)
        a, b = leray_project(galerkin_truncate(v, m)), galerkin_truncate(leray_project(v), m)
        assert np.allclose(a.x.coeffs, b.x.coeffs, atol=1e-15)
        assert np.allclose(a.y.coeffs, b.y.coeffs, atol=1e-15)
        kept = g.k2[np.abs(once.x.coeffs) > 0]
        assert kept.max() <= stokes_eigenvalue(m)


def test_momentum_drift_shrinks_with_dt():
    drifts = []
    for dt in (4e-2, 2e-2, 1e-2):
        base = preset_config("smooth")
        cfg = replace(base, n=32, t_end=1.0, dt=dt, fluid=replace(base.fluid, rho2=3.0))
        m = np.array([[r.mom_x, r.mom_y] for r, _ in trajectory(cfg)])
        drifts.append(np.abs(m - m[0]).max())
    orders = np.log2(np.array(drifts[:-1]) / np.array(drifts[1:]))
    assert np.all(orders >= 0.8), drifts
