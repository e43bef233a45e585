"""Pseudo-spectral solver for the variable-density Navier-Stokes-Cahn-Hilliard
system with the logarithmic potential on the 2-torus."""

from .cahn_hilliard import CHStepConfig, ch_step
from .diagnostics import DiagnosticsRecord, record
from .model import FlowState, FluidParams
from .navier_stokes import NSStepConfig, ns_step
from .spectral import Grid, SpectralField, SpectralVectorField
