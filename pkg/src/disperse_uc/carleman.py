"""Conjugation identity for quadratic weights and the weighted L2 Carleman ratio."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.special import logsumexp

from .errors import DomainError, ResolutionError
from .grid import ComplexField, Grid1D, Grid2D, forward_array, inverse_array

EDGE_TOL = 1e-14
LOG_MAX = 700.0
# Fourier modes this far below the peak are roundoff; dropping them keeps
# repeated spectral derivatives from amplifying noise (Krasny filter)
KRASNY_TOL = 1e-15


@dataclass(frozen=True)
class QuadraticWeight:
    """Q(x) = a x + (b/2) x^2 + c."""

    a: float
    b: float
    c: float = 0.0

    def __call__(self, x):
        return self.a * x + 0.5 * self.b * x ** 2 + self.c

    def half_derivative_factor(self, x):
        # (D Q)/2 with D = -i d/dx
        return (self.a + self.b * x) / 2j


def default_phi(t):
    return -4.0 * (t - 0.5) ** 2 + 2.25


@dataclass(frozen=True)
class CarlemanWeight:
    gamma: float
    R: float
    m: int
    phi: Callable = default_phi
    d1: float = 0.25
    d2: float = 3.25
    p_dec: float = field(init=False)

    def __post_init__(self):
        if not self.gamma > 0 or not self.R > 0:
            raise DomainError("gamma and R must be positive")
        if not 0 < self.d1 < self.d2:
            raise DomainError(f"need 0 < d1 < d2, got d1={self.d1}, d2={self.d2}")
        object.__setattr__(self, "p_dec", 2 * self.m / (2 * self.m - 1))

    def with_gamma(self, gamma: float) -> "CarlemanWeight":
        return CarlemanWeight(gamma, self.R, self.m, self.phi, self.d1, self.d2)

    def s(self, t, x):
        return x / self.R + self.phi(t)

    def Q(self, t, x):
        return 2.0 * self.gamma * self.R ** self.p_dec * self.s(t, x) ** 2

    def min_R(self, gamma0: float) -> float:
        return (self.d1 ** 2 * gamma0) ** (-1.0 / self.p_dec)


def _spectral_D(v: np.ndarray, grid: Grid1D, filter_tol: float = KRASNY_TOL) -> np.ndarray:
    F = forward_array(v, grid)
    if filter_tol:
        mag = np.abs(F)
        F = np.where(mag > filter_tol * mag.max(), F, 0.0)
    return inverse_array(grid.freqs * F, grid)


def _apply_poly(coeffs: np.ndarray, v: np.ndarray, grid: Grid1D, factor: np.ndarray | None) -> np.ndarray:
    """Horner evaluation of sum c_j T^j v with T = D (+ factor)."""
    out = np.zeros_like(v)
    for c in coeffs[::-1]:
        Tout = _spectral_D(out, grid)
        if factor is not None:
            Tout = Tout + factor * out
        out = Tout + c * v
    return out


def _check_edges(u: np.ndarray, where: str) -> None:
    scale = float(np.max(np.abs(u)))
    edge = max(float(np.max(np.abs(u[..., :2]))), float(np.max(np.abs(u[..., -2:]))))
    if edge > EDGE_TOL * max(scale, 1.0):
        raise DomainError(f"{where}: field is not negligible at the boundary (|u| = {edge:.2e})")


def treves_check(u: ComplexField, Q: QuadraticWeight, P_coeffs: Sequence[float]) -> float:
    """Relative defect between the two sides of the quadratic-weight identity.

    ``P_coeffs`` are ascending: ``P(xi) = sum P_coeffs[j] xi^j``.  The left side
    is the weighted norm of P(D)u; the right side sums ``b^k / k!`` times the
    norms of ``P^(k)(D + DQ/2)`` applied to ``exp(Q/2) u``.
    """
    grid = u.grid
    if not isinstance(grid, Grid1D):
        raise DomainError("treves_check needs a 1-D field")
    _check_edges(u.samples, "treves_check")
    coeffs = np.trim_zeros(np.asarray(P_coeffs, dtype=float), "b")
    if coeffs.size == 0:
        return 0.0
    x = grid.x
    Qx = Q(x)
    a = np.abs(u.samples)
    with np.errstate(divide="ignore"):
        log_v = Qx / 2.0 + np.log(a)
    # the norms square exp(Q/2) u
    if 2.0 * np.max(log_v) > LOG_MAX:
        raise DomainError("exp(Q) |u|^2 overflows")
    v = u.samples * np.exp(Qx / 2.0)

    Pu = _apply_poly(coeffs, u.samples, grid, None)
    lhs = float(np.sum(np.exp(Qx) * np.abs(Pu) ** 2) * grid.dx)

    factor = Q.half_derivative_factor(x)
    rhs = 0.0
    deriv = coeffs
    k = 0
    while deriv.size:
        if k > 0 and Q.b == 0.0:
            break
        term = _apply_poly(deriv, v, grid, factor)
        rhs += Q.b ** k / math.factorial(k) * float(np.sum(np.abs(term) ** 2) * grid.dx)
        deriv = npoly.polyder(deriv) if deriv.size > 1 else np.array([])
        k += 1
    top = max(lhs, rhs)
    return abs(lhs - rhs) / top if top > 0 else 0.0


@dataclass(frozen=True)
class CarlemanReport:
    gammas: np.ndarray
    ratios: np.ndarray
    log_lhs: np.ndarray
    log_rhs: np.ndarray
    skipped: bool = False

    @property
    def min_ratio(self) -> float:
        return float(np.min(self.ratios)) if self.ratios.size else 0.0

    @property
    def band(self) -> float:
        return float(np.max(self.ratios) / np.min(self.ratios))

    @property
    def non_decaying(self) -> bool:
        # ratio at the largest gamma is at least the one at the smallest
        return bool(self.ratios[-1] >= self.ratios[0])


def support_violations(u: ComplexField, w: CarlemanWeight, tol: float = EDGE_TOL) -> np.ndarray:
    """(t, x) points where |u| > tol but x/R + phi(t) leaves [d1, d2]."""
    t, x = u.grid.mesh()
    s = np.abs(w.s(t, x))
    bad = (np.abs(u.samples) > tol) & ((s < w.d1) | (s > w.d2))
    return np.column_stack([t[bad], x[bad]])


def carleman_operator(u: ComplexField, m: int) -> np.ndarray:
    """(D_t + D_x^{2m}) u spectrally on a 2-D grid."""
    tau, xi = u.grid.freq_mesh()
    return inverse_array((tau + xi ** (2 * m)) * forward_array(u.samples, u.grid), u.grid)


def carleman_l2_check(u: ComplexField, w: CarlemanWeight, gamma_list: Sequence[float],
                      gamma0: float | None = None) -> CarlemanReport:
    """Normalized Carleman ratio for each gamma.

    ``ratio(gamma) = int e^Q |D_t u + D_x^{2m} u|^2 / (gamma^{4m-1} R^p int e^Q |u|^2)``.
    Both integrals are restricted to the support of ``u`` (points with
    ``|u| > 1e-14``), where the continuum integrands live, and accumulated in
    log space.
    """
    grid = u.grid
    if not isinstance(grid, Grid2D):
        raise DomainError("carleman_l2_check needs a (t, x) field")
    gammas = np.asarray(gamma_list, dtype=float)
    if gammas.size == 0 or np.any(gammas <= 0) or np.any(np.diff(gammas) <= 0):
        raise DomainError("gamma_list must be increasing positive values")
    if gamma0 is not None:
        if np.any(gammas < gamma0):
            raise DomainError(f"gamma values must be >= gamma0={gamma0}")
        if w.R < w.min_R(gamma0):
            raise DomainError(f"R={w.R} is below the admissible {w.min_R(gamma0):.4g}")
    amp = np.abs(u.samples)
    if np.max(amp) == 0.0:
        empty = np.zeros(0)
        return CarlemanReport(empty, empty, empty, empty, skipped=True)
    bad = support_violations(u, w)
    if bad.size:
        pts = ", ".join(f"({t:.3g}, {x:.3g})" for t, x in bad[:5])
        raise DomainError(f"support leaves the annulus at {len(bad)} points, e.g. {pts}")
    _check_edges(u.samples, "carleman_l2_check")
    _check_edges(u.samples.T, "carleman_l2_check")
    Pu = carleman_operator(u, w.m)
    t, x = grid.mesh()
    supp = amp > EDGE_TOL
    s2 = w.s(t[supp], x[supp]) ** 2
    with np.errstate(divide="ignore"):
        log_pu = 2.0 * np.log(np.abs(Pu[supp]))
    log_u = 2.0 * np.log(amp[supp])
    log_cell = math.log(grid.cell)
    ratios, lhs, rhs = [], [], []
    for g in gammas:
        Qv = 2.0 * g * w.R ** w.p_dec * s2
        ll = float(logsumexp(Qv + log_pu)) + log_cell
        lr = float(logsumexp(Qv + log_u)) + log_cell
        if not (np.isfinite(ll) and np.isfinite(lr)):
            raise ResolutionError(f"weighted integrals not finite at gamma={g}")
        norm = (4 * w.m - 1) * math.log(g) + w.p_dec * math.log(w.R)
        lhs.append(ll)
        rhs.append(lr)
        ratios.append(math.exp(ll - lr - norm))
    return CarlemanReport(gammas, np.array(ratios), np.array(lhs), np.array(rhs))


def bump(s):
    """C-infinity bump exp(-1/(1-s^2)) on |s| < 1, zero outside."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out
