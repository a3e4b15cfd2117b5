"""Uniform grids, scaled discrete Fourier transforms and discrete Lebesgue norms.

Conventions follow the continuum transform pair

    F f(xi)   = int e^{-i x xi} f(x) dx
    F^-1 g(x) = (2 pi)^-1 int e^{i x xi} g(xi) dxi

so the forward DFT carries the cell measure ``dx`` and the inverse carries
``dxi / (2 pi)``.  Frequencies are always exposed in centered order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DomainError


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid1D:
    """Uniform sampling of ``[-half_width, half_width)`` with ``n`` points."""

    half_width: float
    n: int
    dx: float = field(init=False)
    x: np.ndarray = field(init=False, repr=False, compare=False)
    freqs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.half_width) and self.half_width > 0):
            raise DomainError(f"half_width must be positive, got {self.half_width}")
        if int(self.n) != self.n or not _is_power_of_two(int(self.n)):
            raise DomainError(f"n must be a power of two, got {self.n}")
        if self.n < 8:
            raise DomainError(f"n must be at least 8, got {self.n}")
        n = int(self.n)
        dx = 2.0 * self.half_width / n
        x = -self.half_width + dx * np.arange(n)
        freqs = (np.pi / self.half_width) * np.arange(-n // 2, n // 2)
        x.flags.writeable = False
        freqs.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "freqs", freqs)

    @property
    def dxi(self) -> float:
        return np.pi / self.half_width

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,)

    @property
    def cell(self) -> float:
        return self.dx

    @property
    def freq_cell(self) -> float:
        return self.dxi

    @property
    def size(self) -> int:
        return self.n


@dataclass(frozen=True)
class Grid2D:
    """Tensor product of a time axis and a space axis; arrays are indexed ``[t, x]``."""

    t_axis: Grid1D
    x_axis: Grid1D

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.t_axis.n, self.x_axis.n)

    @property
    def cell(self) -> float:
        return self.t_axis.dx * self.x_axis.dx

    @property
    def freq_cell(self) -> float:
        return self.t_axis.dxi * self.x_axis.dxi

    @property
    def size(self) -> int:
        return self.t_axis.n * self.x_axis.n

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.t_axis.x, self.x_axis.x, indexing="ij")

    def freq_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.t_axis.freqs, self.x_axis.freqs, indexing="ij")


Grid = Union[Grid1D, Grid2D]


@dataclass(frozen=True)
class ComplexField:
    """Complex samples attached to a grid.

    ``spectral`` marks samples living on the frequency lattice; it only changes
    the cell measure used by :func:`lp_norm`.
    """

    grid: Grid
    samples: np.ndarray
    spectral: bool = False

    def __post_init__(self):
        arr = np.array(self.samples, dtype=complex)
        if arr.size != self.grid.size:
            raise DomainError(
                f"sample count {arr.size} does not match grid size {self.grid.size}"
            )
        arr = arr.reshape(self.grid.shape)
        if not np.all(np.isfinite(arr)):
            raise DomainError("field samples must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def with_samples(self, samples, spectral: bool | None = None) -> "ComplexField":
        return ComplexField(self.grid, samples, self.spectral if spectral is None else spectral)

    @property
    def cell(self) -> float:
        return self.grid.freq_cell if self.spectral else self.grid.cell

    def __add__(self, other: "ComplexField") -> "ComplexField":
        return self.with_samples(self.samples + other.samples)

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        return self.with_samples(self.samples - other.samples)

    def __mul__(self, c) -> "ComplexField":
        if isinstance(c, ComplexField):
            return self.with_samples(self.samples * c.samples)
        return self.with_samples(self.samples * c)

    __rmul__ = __mul__

    def __neg__(self) -> "ComplexField":
        return self.with_samples(-self.samples)

    @property
    def abs(self) -> np.ndarray:
        return np.abs(self.samples)


def make_grid(half_width: float, n: int) -> Grid1D:
    return Grid1D(float(half_width), n)


def make_grid2d(t_half_width: float, nt: int, x_half_width: float, nx: int) -> Grid2D:
    return Grid2D(make_grid(t_half_width, nt), make_grid(x_half_width, nx))


def from_function(grid: Grid, func) -> ComplexField:
    """Sample ``func`` on ``grid``; 2-D functions are called as ``func(t, x)``."""
    if isinstance(grid, Grid2D):
        t, x = grid.mesh()
        return ComplexField(grid, func(t, x))
    return ComplexField(grid, func(grid.x))


def _phase(axis: Grid1D) -> np.ndarray:
    # x_0 = -half_width contributes exp(i*pi*k) = (-1)^k on the centered lattice
    k = np.arange(-axis.n // 2, axis.n // 2)
    return np.where(k % 2 == 0, 1.0, -1.0)


def _axes(grid: Grid) -> tuple[Grid1D, ...]:
    return (grid.t_axis, grid.x_axis) if isinstance(grid, Grid2D) else (grid,)


def forward_array(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Array-level forward transform; returns centered-frequency samples."""
    out = np.asarray(values, dtype=complex)
    for ax, axis in enumerate(_axes(grid)):
        out = np.fft.fftshift(np.fft.fft(out, axis=ax), axes=ax)
        shape = [1] * out.ndim
        shape[ax] = axis.n
        out = out * (axis.dx * _phase(axis)).reshape(shape)
    return out


def inverse_array(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Array-level inverse of :func:`forward_array`."""
    out = np.asarray(values, dtype=complex)
    for ax, axis in enumerate(_axes(grid)):
        shape = [1] * out.ndim
        shape[ax] = axis.n
        out = out * (_phase(axis) / axis.dx).reshape(shape)
        out = np.fft.ifft(np.fft.ifftshift(out, axes=ax), axis=ax)
    return out


def dft_forward(f: ComplexField) -> ComplexField:
    """Approximate ``int e^{-ix xi} f(x) dx`` at the centered frequency lattice."""
    return f.with_samples(forward_array(f.samples, f.grid), spectral=True)


def dft_inverse(F: ComplexField) -> ComplexField:
    """Approximate ``(2 pi)^-1 int e^{ix xi} F(xi) dxi`` on the physical grid."""
    return F.with_samples(inverse_array(F.samples, F.grid), spectral=False)


def apply_symbol(f: ComplexField, symbol: np.ndarray) -> ComplexField:
    """Fourier multiplier: ``F^-1(symbol * F f)`` with symbol on the centered lattice."""
    return f.with_samples(inverse_array(symbol * forward_array(f.samples, f.grid), f.grid))


def lp_norm_array(values: np.ndarray, cell: float, p: float) -> float:
    if p == np.inf:
        return float(np.max(np.abs(values))) if np.size(values) else 0.0
    if not p >= 1:
        raise DomainError(f"p must be >= 1 or inf, got {p}")
    a = np.abs(values)
    scale = float(np.max(a)) if a.size else 0.0
    if scale == 0.0:
        return 0.0
    # scale first so |f|^p cannot overflow for large p
    return scale * float(np.sum((a / scale) ** p) * cell) ** (1.0 / p)


def lp_norm(f: ComplexField, p: float) -> float:
    """Discrete L^p norm ``(sum |f_j|^p * cell)^(1/p)``; ``p = inf`` gives the max."""
    if p != np.inf and not p >= 1:
        raise DomainError(f"p must be >= 1 or inf, got {p}")
    return lp_norm_array(f.samples, f.cell, p)
