"""Free, analytic and potential flows for i u_t - D^{2m} u = V u."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .grid import ComplexField, Grid1D, forward_array, inverse_array, lp_norm


@dataclass(frozen=True)
class EvolveParams:
    m: int
    eps: float
    t_final: float
    dt: float
    potential: Optional[ComplexField] = None

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("m must be positive")
        if self.eps < 0:
            raise DomainError("eps must be nonnegative")
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if self.potential is not None:
            _real_potential(self.potential)


def _real_potential(V) -> np.ndarray:
    arr = V.samples if isinstance(V, ComplexField) else np.asarray(V, dtype=complex)
    if np.max(np.abs(np.imag(arr)), initial=0.0) != 0.0:
        raise DomainError("potential must be real-valued")
    return np.real(arr).astype(float)


def _dispersion(grid: Grid1D, m: int) -> np.ndarray:
    return grid.freqs ** (2 * m)


def free_propagate(u0: ComplexField, t: float, m: int) -> ComplexField:
    if t == 0:
        return u0
    sym = np.exp(-1j * t * _dispersion(u0.grid, m))
    return u0.with_samples(inverse_array(sym * forward_array(u0.samples, u0.grid), u0.grid))


def apply_dispersion(u: ComplexField, m: int) -> ComplexField:
    """D^{2m} u applied spectrally."""
    sym = _dispersion(u.grid, m)
    return u.with_samples(inverse_array(sym * forward_array(u.samples, u.grid), u.grid))


def _split_steps(u: np.ndarray, grid: Grid1D, h: complex, steps: int, lam: np.ndarray, V: np.ndarray) -> np.ndarray:
    # Strang: half potential, full dispersion, half potential; h is the complex time step
    half = np.exp(-0.5 * h * V)
    full = np.exp(-h * lam)
    for _ in range(steps):
        u = half * u
        u = inverse_array(full * forward_array(u, grid), grid)
        u = half * u
    return u


def analytic_propagate(
    u0: ComplexField,
    eps: float,
    t: float,
    m: int,
    V=None,
    dt: float = 1e-2,
) -> ComplexField:
    """Apply exp(-(eps + i t)(D^{2m} + V)) to ``u0``.

    Without a potential this is a single spectral multiplication.  With one,
    the complex time ``w = eps + i t`` is cut into ``N = ceil(|w| / dt)`` equal
    pieces and each piece is a Strang step.
    """
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    w = complex(eps, t)
    lam = _dispersion(u0.grid, m)
    if V is None:
        sym = np.exp(-w * lam)
        return u0.with_samples(inverse_array(sym * forward_array(u0.samples, u0.grid), u0.grid))
    Vr = _real_potential(V)
    steps = max(1, int(math.ceil(abs(w) / dt - 1e-12)))
    return u0.with_samples(_split_steps(u0.samples, u0.grid, w / steps, steps, lam, Vr))


def potential_propagate(
    u0: ComplexField,
    t_final: float,
    dt: float,
    m: int,
    V,
) -> list[ComplexField]:
    """Strang-split trajectory at times 0, dt, ..., t_final (inclusive)."""
    if not dt > 0:
        raise DomainError("dt must be positive")
    Vr = _real_potential(V)
    ratio = t_final / dt
    steps = int(round(ratio))
    if abs(ratio - steps) > 1e-12 * max(1.0, abs(ratio)) or steps < 0:
        raise DomainError(f"dt={dt} does not divide t_final={t_final}")
    grid = u0.grid
    lam = _dispersion(grid, m)
    half = np.exp(-0.5j * dt * Vr)
    full = np.exp(-1j * dt * lam)
    u = np.asarray(u0.samples)
    frames = [u0]
    for _ in range(steps):
        u = half * u
        u = inverse_array(full * forward_array(u, grid), grid)
        u = half * u
        frames.append(u0.with_samples(u))
    return frames


def residual(trajectory: Sequence[ComplexField], dt: float, m: int, V=None) -> float:
    """Max over interior frames of the L2 norm of the centered PDE residual."""
    if len(trajectory) < 3:
        raise DomainError(f"residual needs at least 3 frames, got {len(trajectory)}")
    Vr = None if V is None else _real_potential(V)
    worst = 0.0
    for k in range(1, len(trajectory) - 1):
        uk = trajectory[k]
        r = 1j * (trajectory[k + 1].samples - trajectory[k - 1].samples) / (2 * dt)
        r = r - apply_dispersion(uk, m).samples
        if Vr is not None:
            r = r - Vr * uk.samples
        worst = max(worst, lp_norm(uk.with_samples(r), 2))
    return worst
