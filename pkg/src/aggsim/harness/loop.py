"""Time integration: Lie splitting (Cahn-Hilliard, then momentum) and the run driver."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterator

from ..cahn_hilliard import CHStepConfig, ch_step
from ..diagnostics import CSV_COLUMNS, DiagnosticsRecord, record
from ..errors import StepFailure
from ..model import FlowState, FluidParams
from ..navier_stokes import NSStepConfig, ns_step
from .checkpoint import canonical_fields, read_checkpoint, write_checkpoint
from .config import RunConfig, dump_config
from .initial import initial_state

log = logging.getLogger(__name__)

MAX_HALVINGS = 5


@dataclass
class StepStats:
    newton_iters: int = 0
    pcg_iters: int = 0
    substeps: int = 0

    def add(self, other: "StepStats") -> None:
        self.newton_iters += other.newton_iters
        self.pcg_iters += other.pcg_iters
        self.substeps += other.substeps


def _single_step(state: FlowState, p: FluidParams, ns_cfg: NSStepConfig, ch_cfg: CHStepConfig):
    phi, mu, ch_report = ch_step(state.phi, state.u, p, ch_cfg)
    u, pressure, pcg_iters = ns_step(state.u, phi, mu, p, ns_cfg)
    new = FlowState(state.time + ch_cfg.dt, u, phi, mu=mu, pressure=pressure)
    return new, StepStats(ch_report.newton_iters, pcg_iters, 1)


def step(state, p, ns_cfg, ch_cfg, depth: int = 0):
    """One step of size ``ch_cfg.dt``; a failed step is redone as two half steps."""
    try:
        return _single_step(state, p, ns_cfg, ch_cfg)
    except StepFailure as exc:
        if depth >= MAX_HALVINGS:
            raise
        half = ch_cfg.dt / 2
        log.info("step failed at t=%.6g (%s); retrying with dt=%.3e", state.time, exc, half)
        ns_half, ch_half = replace(ns_cfg, dt=half), replace(ch_cfg, dt=half)
        mid, stats = step(state, p, ns_half, ch_half, depth + 1)
        end, more = step(mid, p, ns_half, ch_half, depth + 1)
        stats.add(more)
        return end, stats


def advance(state: FlowState, p: FluidParams, ns_cfg: NSStepConfig, ch_cfg: CHStepConfig) -> FlowState:
    return step(state, p, ns_cfg, ch_cfg)[0]


def canonicalize(state: FlowState, galerkin_m=None) -> FlowState:
    """Redefine the coefficients as a function of the grid samples.

    A checkpoint stores exactly these samples, so a resumed run starts from
    the same coefficients as the uninterrupted one.
    """
    phi_s = state.phi.samples()
    ux, uy = state.u.samples()
    phi, u = canonical_fields(state.grid, phi_s, ux, uy, galerkin_m)
    return FlowState(state.time, u, phi, mu=state.mu, pressure=state.pressure,
                     source=(phi_s, ux, uy))


def simulate(
    state: FlowState,
    p: FluidParams,
    ns_cfg: NSStepConfig,
    ch_cfg: CHStepConfig,
    n_steps: int,
    every: int = 1,
    start_step: int = 0,
) -> Iterator[tuple[DiagnosticsRecord, FlowState]]:
    """Yield (record, state) every ``every`` steps and after the last step.

    With ``start_step == 0`` the initial state is yielded first.  Otherwise the
    run is a continuation: the starting record is only used as the reference
    for the next energy residual.
    """
    dt = ch_cfg.dt
    prev = record(state, None, p, step=start_step)
    if start_step == 0:
        yield prev, state
    pending = StepStats()
    last = start_step + n_steps
    for k in range(start_step + 1, last + 1):
        state, stats = step(state, p, ns_cfg, ch_cfg)
        state = canonicalize(state, ns_cfg.galerkin_m)
        state.time = k * dt
        pending.add(stats)
        if k % every == 0 or k == last:
            rec = record(
                state, prev, p, dt=(k - prev.step) * dt, step=k,
                newton_iters=pending.newton_iters, pcg_iters=pending.pcg_iters,
            )
            pending = StepStats()
            prev = rec
            yield rec, state


def trajectory(cfg: RunConfig, state: FlowState | None = None):
    """Run ``cfg`` in memory; returns the list of (record, state) pairs."""
    state = initial_state(cfg) if state is None else state
    return list(
        simulate(state, cfg.fluid, cfg.ns, cfg.ch, cfg.n_steps, cfg.output.diagnostics_every)
    )


def run(cfg: RunConfig, out_dir=None, resume_from=None) -> int:
    """Run to ``cfg.t_end`` writing the diagnostics CSV and checkpoints.

    Returns the process exit status: 0 on success, 1 when a step failed even
    after the dt halvings.  Rows already produced are on disk either way.
    """
    out = Path(out_dir if out_dir is not None else cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / cfg.output.csv
    ckpt_path = out / cfg.output.checkpoint
    p = cfg.fluid

    if resume_from is not None:
        ckpt = read_checkpoint(resume_from)
        if ckpt.n != cfg.n or ckpt.params != p:
            log.warning("checkpoint grid/parameters differ from the config; using the checkpoint's")
            p = ckpt.params
        state = ckpt.to_state(cfg.ns.galerkin_m)
        start = int(round(ckpt.time / cfg.dt))
        n_steps = cfg.n_steps - start
        mode = "a"
    else:
        state = initial_state(cfg)
        start = 0
        n_steps = cfg.n_steps
        mode = "w"
        (out / "config.ini").write_text(dump_config(cfg), encoding="utf-8")

    every = cfg.output.diagnostics_every
    ckpt_every = cfg.output.checkpoint_every
    last_state = state
    status = 0
    with open(csv_path, mode, newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if mode == "w":
            writer.writerow(CSV_COLUMNS)
        try:
            for rec, last_state in simulate(state, p, cfg.ns, cfg.ch, n_steps, every, start):
                writer.writerow(rec.to_row())
                fh.flush()
                if ckpt_every and rec.step and rec.step % ckpt_every == 0:
                    write_checkpoint(ckpt_path, last_state, p)
                log.info("step %d t=%.6g E=%.10g max|phi|=%.6f", rec.step, rec.t,
                         rec.E_total, rec.max_abs_phi)
        except StepFailure as exc:
            log.error("run aborted: %s", exc)
            status = 1
        finally:
            fh.flush()
    if status == 0:
        write_checkpoint(ckpt_path, last_state, p)
    return status
