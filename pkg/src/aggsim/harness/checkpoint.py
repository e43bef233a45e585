"""Binary checkpoints.

Layout (little-endian): magic ``b"AGG2"``, u32 version (1), u32 n, f64 time,
six f64 parameters (rho1, rho2, nu1, nu2, theta, theta0), then three ``n x n``
row-major f64 blocks holding the grid samples of phi, u_x and u_y.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError
from ..model import FlowState, FluidParams
from ..navier_stokes import galerkin_truncate
from ..spectral import Grid, SpectralField, SpectralVectorField, to_coeffs

MAGIC = b"AGG2"
VERSION = 1
_HEADER = struct.Struct("<4sIId6d")


@dataclass(frozen=True, eq=False)
class Checkpoint:
    n: int
    time: float
    params: FluidParams
    phi: np.ndarray
    ux: np.ndarray
    uy: np.ndarray
    version: int = VERSION

    @classmethod
    def from_state(cls, state: FlowState, params: FluidParams) -> "Checkpoint":
        if state.source is not None:
            phi, ux, uy = state.source
        else:
            phi, (ux, uy) = state.phi.samples(), state.u.samples()
        return cls(state.grid.n, float(state.time), params, phi, ux, uy)

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(MAGIC, self.version, self.n, self.time, *self.params.as_tuple())
        blocks = b"".join(
            np.ascontiguousarray(a, dtype="<f8").tobytes() for a in (self.phi, self.ux, self.uy)
        )
        return head + blocks

    @classmethod
    def from_bytes(cls, data: bytes) -> "Checkpoint":
        if len(data) < _HEADER.size:
            raise ConfigurationError("checkpoint is truncated")
        magic, version, n, time, *params = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise ConfigurationError(f"not a checkpoint file (magic {magic!r})")
        if version != VERSION:
            raise ConfigurationError(f"unsupported checkpoint version {version}")
        expected = _HEADER.size + 3 * n * n * 8
        if len(data) != expected:
            raise ConfigurationError(f"checkpoint has {len(data)} bytes, expected {expected}")
        arrays = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(3, n, n)
        return cls(n, time, FluidParams(*params), *(a.astype(float) for a in arrays))

    def to_state(self, galerkin_m: int | None = None) -> FlowState:
        """Rebuild the state exactly as the time loop canonicalizes it."""
        grid = Grid(self.n)
        phi, u = canonical_fields(grid, self.phi, self.ux, self.uy, galerkin_m)
        return FlowState(self.time, u, phi, source=(self.phi, self.ux, self.uy))


def canonical_fields(grid: Grid, phi_s, ux_s, uy_s, galerkin_m=None):
    """Coefficients defined by grid samples: transform, then dealias (and truncate)."""
    mask = grid.dealias_mask
    phi = SpectralField(grid, to_coeffs(phi_s) * mask)
    u = SpectralVectorField(
        SpectralField(grid, to_coeffs(ux_s) * mask), SpectralField(grid, to_coeffs(uy_s) * mask)
    )
    if galerkin_m is not None:
        u = galerkin_truncate(u, galerkin_m)
    return phi, u


def write_checkpoint(path, state: FlowState, params: FluidParams) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(Checkpoint.from_state(state, params).to_bytes())
    tmp.replace(path)


def read_checkpoint(path) -> Checkpoint:
    return Checkpoint.from_bytes(Path(path).read_bytes())
