"""Experiment suites.  Each returns a small report object and, given
``out_dir``, writes it as CSV."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ..diagnostics import continuous_dependence_metric
from ..errors import ConfigurationError
from ..navier_stokes import stokes_eigenvalue
from ..spectral import sobolev_norm, vector_sobolev_norm
from .config import RunConfig
from .loop import trajectory

GALERKIN_CUTOFFS = (2, 8, 18, 32)


def _map(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _write(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])


def fit_rate(t, values) -> tuple[float, float]:
    """Least-squares fit of log(values) = a - rate * t; returns (rate, a)."""
    slope, intercept = np.polyfit(np.asarray(t, float), np.log(np.asarray(values, float)), 1)
    return -float(slope), float(intercept)


def observed_orders(errors) -> list[float]:
    return [math.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)]


# Taylor-Green ---------------------------------------------------------------


@dataclass
class TaylorGreenReport:
    times: np.ndarray
    u_norm_sq: np.ndarray
    fitted_rate: float
    expected_rate: float

    @property
    def relative_error(self) -> float:
        return abs(self.fitted_rate - self.expected_rate) / self.expected_rate


def experiment_taylor_green(cfg: RunConfig, out_dir=None) -> TaylorGreenReport:
    """Decay of ||u||^2 for the matched-density vortex.

    The Taylor-Green field has |k|^2 = 2 and ``div(nu D u) = nu/2 Lap u``, so
    ||u||^2 decays like exp(-2 nu t / rho).
    """
    p = cfg.fluid
    if p.rho1 != p.rho2 or p.nu1 != p.nu2:
        raise ConfigurationError("the Taylor-Green oracle needs matched densities and viscosities")
    traj = trajectory(cfg)
    t = np.array([r.t for r, _ in traj])
    e = np.array([vector_sobolev_norm(s.u, 0) ** 2 for _, s in traj])
    rate, _ = fit_rate(t, e)
    report = TaylorGreenReport(t, e, rate, 2.0 * p.nu1 / p.rho1)
    if out_dir is not None:
        _write(Path(out_dir) / "taylor_green.csv", ["t", "u_norm_sq", "fitted_rate", "expected_rate"],
               [[float(a), float(b), rate, report.expected_rate] for a, b in zip(t, e)])
    return report


# Galerkin truncation --------------------------------------------------------


@dataclass
class GalerkinReport:
    cutoffs: tuple[int, ...]
    eigenvalues: tuple[int, ...]
    errors: list[float]  # max over records of ||u_m - u_full||_L2


def _velocities(cfg: RunConfig):
    return [s.u for _, s in trajectory(cfg)]


def experiment_galerkin(cfg: RunConfig, cutoffs=GALERKIN_CUTOFFS, out_dir=None, workers=1):
    """Distance of the Galerkin-truncated velocity to the untruncated one."""
    cfgs = [replace(cfg, ns=replace(cfg.ns, galerkin_m=None))]
    cfgs += [replace(cfg, ns=replace(cfg.ns, galerkin_m=m)) for m in cutoffs]
    full, *truncated = _map(_velocities, cfgs, workers)
    errors = [
        max(vector_sobolev_norm(a - b, 0) for a, b in zip(run, full)) for run in truncated
    ]
    report = GalerkinReport(tuple(cutoffs), tuple(stokes_eigenvalue(m) for m in cutoffs), errors)
    if out_dir is not None:
        _write(Path(out_dir) / "galerkin.csv", ["m", "eigenvalue", "max_l2_error"],
               list(zip(report.cutoffs, report.eigenvalues, errors)))
    return report


# Continuous dependence ------------------------------------------------------


@dataclass
class PerturbReport:
    epsilons: list[float]
    times: np.ndarray
    metrics: list[np.ndarray]  # per epsilon, metric time series
    rate: float  # fitted Lambda
    constant: float  # fitted C

    def envelope(self, eps: float) -> np.ndarray:
        return self.constant * np.exp(self.rate * self.times) * eps**2

    @property
    def final_metrics(self) -> list[float]:
        return [float(m[-1]) for m in self.metrics]


def _states(cfg: RunConfig):
    return [s for _, s in trajectory(cfg)]


def experiment_perturb(cfg: RunConfig, epsilons, out_dir=None, workers=1) -> PerturbReport:
    """Distance between the base run and runs with phi_0 + eps cos(x).

    The envelope C exp(Lambda t) eps^2 is fitted on the smallest eps: Lambda by
    least squares on log(metric / eps^2), then C as the smallest constant that
    bounds that trajectory.  The other trajectories are tested against it.
    """
    epsilons = sorted(float(e) for e in epsilons)
    if not epsilons or epsilons[0] <= 0:
        raise ConfigurationError("epsilons must be positive")
    cfgs = [replace(cfg, ic=replace(cfg.ic, perturbation=0.0))]
    cfgs += [replace(cfg, ic=replace(cfg.ic, perturbation=e)) for e in epsilons]
    runs = _map(_states, cfgs, workers)
    base = runs[0]
    times = np.array([s.time for s in base])
    metrics = [
        np.array([continuous_dependence_metric(a, b, cfg.fluid) for a, b in zip(run, base)])
        for run in runs[1:]
    ]
    scaled = metrics[0] / epsilons[0] ** 2
    slope, _ = np.polyfit(times, np.log(scaled), 1)
    constant = float(np.max(scaled * np.exp(-slope * times)))
    report = PerturbReport(epsilons, times, metrics, float(slope), constant)
    if out_dir is not None:
        rows = []
        for eps, m in zip(epsilons, metrics):
            env = report.envelope(eps)
            rows += [[eps, float(t), float(a), float(b)] for t, a, b in zip(times, m, env)]
        _write(Path(out_dir) / "perturb.csv", ["epsilon", "t", "metric", "envelope"], rows)
        _write(Path(out_dir) / "perturb_summary.csv",
               ["epsilon", "final_metric", "rate", "constant"],
               [[e, m, report.rate, report.constant] for e, m in zip(epsilons, report.final_metrics)])
    return report


# Time-step refinement -------------------------------------------------------


@dataclass
class ConvergenceReport:
    dts: list[float]
    differences: list[float]  # ||phi_dt - phi_{dt/2}||_L2 at t_end
    orders: list[float]


def _final_phi(cfg: RunConfig):
    return trajectory(replace(cfg, output=replace(cfg.output, diagnostics_every=cfg.n_steps)))[-1][1].phi


def experiment_convergence_dt(cfg: RunConfig, levels: int = 3, out_dir=None, workers=1):
    """Halve dt ``levels`` times from ``cfg.dt`` and estimate the order."""
    if levels < 3:
        raise ConfigurationError(f"an order fit needs at least 3 levels, got {levels}")
    dts = [cfg.dt / 2**i for i in range(levels)]
    finals = _map(_final_phi, [cfg.with_dt(dt) for dt in dts], workers)
    diffs = [sobolev_norm(finals[i] - finals[i + 1], 0) for i in range(levels - 1)]
    report = ConvergenceReport(dts, diffs, observed_orders(diffs))
    if out_dir is not None:
        _write(Path(out_dir) / "convergence_dt.csv", ["dt", "difference", "order"],
               [[dts[i], diffs[i], report.orders[i - 1] if i else ""] for i in range(len(diffs))])
    return report
