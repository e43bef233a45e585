"""Fourier representation of real periodic fields on the torus (R / 2 pi Z)^2.

Coefficients are stored as full ``n x n`` complex arrays in FFT order with the
normalization ``f_hat[k] = n^-2 sum_j f(x_j) exp(-i k.x_j)``, so ``f_hat[0, 0]`` is
exactly the mean of the samples.  Array axis 0 is ``x``, axis 1 is ``y``.

Derivative symbols are zeroed on the Nyquist lines (``|k_x| = n/2`` or
``|k_y| = n/2``) so odd derivatives of real fields stay real.  Dealiasing follows
the 2/3 rule: modes with ``max(|k_x|, |k_y|) > n/3`` are removed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError

TWO_PI = 2.0 * np.pi
AREA = TWO_PI**2


@dataclass(frozen=True)
class Grid:
    """Uniform ``n x n`` collocation grid on the 2 pi periodic square."""

    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise ConfigurationError(f"grid size must be an integer, got {self.n!r}")
        if self.n < 8 or self.n % 2:
            raise ConfigurationError(f"grid size must be even and >= 8, got {self.n}")

    @property
    def h(self) -> float:
        return TWO_PI / self.n

    @cached_property
    def x(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n) / self.n

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.x, indexing="ij")

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        # integer wavenumbers in FFT order; the Nyquist entry is stored as -n/2
        return np.rint(np.fft.fftfreq(self.n, 1.0 / self.n)).astype(np.int64)

    @cached_property
    def kx(self) -> np.ndarray:
        return np.broadcast_to(self.wavenumbers[:, None], (self.n, self.n)).astype(float)

    @cached_property
    def ky(self) -> np.ndarray:
        return np.broadcast_to(self.wavenumbers[None, :], (self.n, self.n)).astype(float)

    @cached_property
    def k2(self) -> np.ndarray:
        return self.kx**2 + self.ky**2

    @cached_property
    def k4(self) -> np.ndarray:
        return self.k2**2

    @cached_property
    def inv_k2(self) -> np.ndarray:
        out = np.zeros_like(self.k2)
        nz = self.k2 > 0
        out[nz] = 1.0 / self.k2[nz]
        return out

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        kmax = np.maximum(np.abs(self.kx), np.abs(self.ky))
        return 3 * kmax <= self.n

    @cached_property
    def derivative_mask(self) -> np.ndarray:
        nyq = self.n // 2
        return (np.abs(self.kx) != nyq) & (np.abs(self.ky) != nyq)

    @cached_property
    def ikx(self) -> np.ndarray:
        return 1j * self.kx * self.derivative_mask

    @cached_property
    def iky(self) -> np.ndarray:
        return 1j * self.ky * self.derivative_mask

    @cached_property
    def lap_symbol(self) -> np.ndarray:
        return -self.k2 * self.derivative_mask


# ---------------------------------------------------------------------------
# raw array transforms (used directly by the time steppers)


def to_coeffs(samples: np.ndarray) -> np.ndarray:
    n = samples.shape[-1]
    return sfft.fft2(samples) / (n * n)


def to_samples(coeffs: np.ndarray) -> np.ndarray:
    n = coeffs.shape[-1]
    return sfft.ifft2(coeffs * (n * n)).real


# ---------------------------------------------------------------------------
# field containers


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Truncated Fourier coefficients of a real scalar field."""

    grid: Grid
    coeffs: np.ndarray

    @classmethod
    def from_samples(cls, samples, grid: Grid) -> "SpectralField":
        return forward_transform(samples, grid)

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros((grid.n, grid.n), dtype=complex))

    @classmethod
    def constant(cls, value: float, grid: Grid) -> "SpectralField":
        c = np.zeros((grid.n, grid.n), dtype=complex)
        c[0, 0] = value
        return cls(grid, c)

    def samples(self) -> np.ndarray:
        return to_samples(self.coeffs)

    def reality_defect(self) -> float:
        """Largest ``|f_hat[-k] - conj(f_hat[k])|`` over the grid."""
        flipped = np.roll(self.coeffs[::-1, ::-1], 1, axis=(0, 1))
        return float(np.max(np.abs(flipped - np.conj(self.coeffs))))

    def _check(self, other):
        if other.grid != self.grid:
            raise ConfigurationError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, SpectralField):
            self._check(other)
            return SpectralField(self.grid, self.coeffs + other.coeffs)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, SpectralField):
            self._check(other)
            return SpectralField(self.grid, self.coeffs - other.coeffs)
        return NotImplemented

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, (int, float, np.floating, np.integer)):
            return SpectralField(self.grid, self.coeffs * scalar)
        return NotImplemented

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SpectralVectorField:
    """Pair of scalar fields ``(u_x, u_y)`` on a shared grid."""

    x: SpectralField
    y: SpectralField

    def __post_init__(self):
        if self.x.grid != self.y.grid:
            raise ConfigurationError("vector components live on different grids")

    @property
    def grid(self) -> Grid:
        return self.x.grid

    @property
    def components(self) -> tuple[SpectralField, SpectralField]:
        return (self.x, self.y)

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralVectorField":
        return cls(SpectralField.zeros(grid), SpectralField.zeros(grid))

    @classmethod
    def from_samples(cls, ux, uy, grid: Grid) -> "SpectralVectorField":
        return cls(forward_transform(ux, grid), forward_transform(uy, grid))

    def samples(self) -> tuple[np.ndarray, np.ndarray]:
        return self.x.samples(), self.y.samples()

    def __add__(self, other):
        return SpectralVectorField(self.x + other.x, self.y + other.y)

    def __sub__(self, other):
        return SpectralVectorField(self.x - other.x, self.y - other.y)

    def __neg__(self):
        return SpectralVectorField(-self.x, -self.y)

    def __mul__(self, scalar):
        return SpectralVectorField(self.x * scalar, self.y * scalar)

    __rmul__ = __mul__


# ---------------------------------------------------------------------------
# operations


def forward_transform(samples, grid: Grid) -> SpectralField:
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (grid.n, grid.n):
        raise ConfigurationError(
            f"samples have shape {samples.shape}, grid expects {(grid.n, grid.n)}"
        )
    if not np.all(np.isfinite(samples)):
        raise ConfigurationError("samples contain non-finite values")
    return SpectralField(grid, to_coeffs(samples))


def backward_transform(f: SpectralField) -> np.ndarray:
    return f.samples()


def gradient(f: SpectralField) -> SpectralVectorField:
    g = f.grid
    return SpectralVectorField(
        SpectralField(g, g.ikx * f.coeffs), SpectralField(g, g.iky * f.coeffs)
    )


def divergence(v: SpectralVectorField) -> SpectralField:
    g = v.grid
    return SpectralField(g, g.ikx * v.x.coeffs + g.iky * v.y.coeffs)


def laplacian(f: SpectralField) -> SpectralField:
    return SpectralField(f.grid, f.grid.lap_symbol * f.coeffs)


def bilaplacian(f: SpectralField) -> SpectralField:
    g = f.grid
    return SpectralField(g, g.k4 * g.derivative_mask * f.coeffs)


def dealias(f: SpectralField) -> SpectralField:
    return SpectralField(f.grid, f.coeffs * f.grid.dealias_mask)


def dealias_vector(v: SpectralVectorField) -> SpectralVectorField:
    return SpectralVectorField(dealias(v.x), dealias(v.y))


def mean(f: SpectralField) -> float:
    return float(f.coeffs[0, 0].real)


def sobolev_norm(f: SpectralField, s: int) -> float:
    """Coefficient-sum ``H^s`` norm scaled by the torus area.

    ``s = 0`` is the plain ``L^2`` norm; for ``s >= 1`` the weight is
    ``1 + |k|^(2s)``.
    """
    if s < 0:
        raise ConfigurationError(f"Sobolev index must be nonnegative, got {s}")
    power = np.abs(f.coeffs) ** 2
    if s == 0:
        total = power.sum()
    else:
        total = ((1.0 + f.grid.k2**s) * power).sum()
    return float(np.sqrt(AREA * total))


def vector_sobolev_norm(v: SpectralVectorField, s: int) -> float:
    return float(np.hypot(sobolev_norm(v.x, s), sobolev_norm(v.y, s)))


def l2_inner(f: SpectralField, g: SpectralField) -> float:
    """``int f g`` over the torus, by Parseval."""
    return float(AREA * np.real(np.vdot(g.coeffs, f.coeffs)))


def leray_project(v: SpectralVectorField) -> SpectralVectorField:
    """Remove the gradient part of ``v``; the ``k = 0`` mode is kept."""
    g = v.grid
    ux, uy = v.x.coeffs, v.y.coeffs
    kdotu = (g.kx * ux + g.ky * uy) * g.inv_k2
    return SpectralVectorField(
        SpectralField(g, ux - g.kx * kdotu), SpectralField(g, uy - g.ky * kdotu)
    )


def symmetric_gradient(v: SpectralVectorField):
    """``D v = (grad v + grad v^T) / 2`` as a nested 2x2 tuple of fields."""
    g = v.grid
    dxu, dyu = g.ikx * v.x.coeffs, g.iky * v.x.coeffs
    dxv, dyv = g.ikx * v.y.coeffs, g.iky * v.y.coeffs
    off = SpectralField(g, 0.5 * (dyu + dxv))
    return (
        (SpectralField(g, dxu), off),
        (off, SpectralField(g, dyv)),
    )
