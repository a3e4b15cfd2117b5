"""The multiplier 1/(tau + (xi+i)^{2m} + ib), root-anchored frequency cutoffs and
empirical L^p -> L^p' ratios.

Operator norms are probed from below: every ratio is a maximum over a finite
ensemble of test functions.  Because the norm is invariant under modulation,
Galilean shear and (tracked) dilation, each test function is also tried in
frames that carry it onto the singular points of the symbol.  A frame is an
affine change of frequency variables; applying it costs nothing beyond
evaluating the symbol at mapped lattice points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.special import comb

from .errors import DomainError, NumericalError, SingularityError
from .grid import ComplexField, Grid1D, Grid2D, forward_array, inverse_array, lp_norm, lp_norm_array

SINGULAR_GUARD = 1e-8


# polynomials -------------------------------------------------------------

@dataclass(frozen=True)
class MultiplierParams:
    m: int
    b: float
    P_coeffs: np.ndarray = field(repr=False)
    Qb_coeffs: np.ndarray = field(repr=False)
    p_leb: float = field(init=False)
    pprime_leb: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "p_leb", (4 * self.m + 2) / (4 * self.m + 1))
        object.__setattr__(self, "pprime_leb", float(4 * self.m + 2))

    def P(self, xi):
        return npoly.polyval(xi, self.P_coeffs)

    def Q(self, xi):
        return npoly.polyval(xi, self.Qb_coeffs)

    def reconstruction_defect(self) -> float:
        full = binomial_coeffs(self.m).astype(complex)
        full[0] += 1j * self.b
        mine = np.zeros(2 * self.m + 1, dtype=complex)
        mine += self.P_coeffs
        mine[: 2 * self.m] += 1j * self.Qb_coeffs
        return float(np.max(np.abs(mine - full)))


def binomial_coeffs(m: int) -> np.ndarray:
    """Ascending coefficients of (xi + i)^{2m}."""
    n = 2 * m
    k = np.arange(n + 1)
    # coefficient of xi^k is C(n, k) i^{n-k}
    return comb(n, k, exact=False) * (1j ** (n - k))


def pq_split(m: int, b: float) -> MultiplierParams:
    """Split (xi + i)^{2m} + ib into P(xi) + i Q_b(xi) with real P, Q_b."""
    if int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m}")
    m = int(m)
    c = binomial_coeffs(m)
    P = np.round(c.real).astype(float)
    Q = np.round(c.imag).astype(float)[: 2 * m].copy()
    Q[0] += float(b)
    return MultiplierParams(m, float(b), P, Q)


# roots and cutoffs -------------------------------------------------------

@dataclass(frozen=True)
class Cutoff:
    """Characteristic function of one half-open interval ``(lo, hi]``.

    Membership is evaluated through the normalized coordinate
    ``(xi - center) / scale`` and a unit interval, exactly as the dilation
    formulas define the pieces, so neighbouring pieces share endpoints bit for
    bit.
    """

    kind: str
    k: int
    nu: int
    center: float
    scale: float
    unit: tuple[float, float]

    @property
    def interval(self) -> tuple[float, float]:
        return (self.center + self.scale * self.unit[0], self.center + self.scale * self.unit[1])

    def __call__(self, xi) -> np.ndarray:
        y = (np.asarray(xi, dtype=float) - self.center) / self.scale
        return ((y > self.unit[0]) & (y <= self.unit[1])).astype(float)


@dataclass(frozen=True)
class CenterCutoff:
    """The central interval; its ends are tested in the same normalized
    coordinates as the first outer pieces."""

    a_lo: float
    s_lo: float
    a_hi: float
    s_hi: float
    kind: str = "center"
    k: int = 0
    nu: int = 0

    @property
    def interval(self) -> tuple[float, float]:
        return (self.a_lo - self.s_lo / 2, self.a_hi + self.s_hi / 2)

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        right = (xi - self.a_hi) / (0.5 * self.s_hi) <= 1.0
        left = (xi - self.a_lo) / (0.5 * self.s_lo) > -1.0
        return (left & right).astype(float)


@dataclass(frozen=True)
class RootDecomposition:
    roots: np.ndarray
    a_sorted: np.ndarray
    cutoff_descriptors: list
    scales: tuple[float, float]

    @property
    def real_roots(self) -> np.ndarray:
        r = self.roots
        return np.sort(r[np.abs(r.imag) <= 1e-9 * (1 + np.abs(r))].real)

    @property
    def center(self) -> CenterCutoff:
        a = self.a_sorted
        return CenterCutoff(a[0], self.scales[0], a[-1], self.scales[1])

    def plus(self, k: int) -> Cutoff:
        if k < 1:
            raise DomainError("outer cutoffs start at k = 1")
        a = self.a_sorted[-1]
        return Cutoff("plus_k", k, 0, a, 2.0 ** (k - 2) * self.scales[1], (1.0, 2.0))

    def minus(self, k: int) -> Cutoff:
        if k < 1:
            raise DomainError("outer cutoffs start at k = 1")
        a = self.a_sorted[0]
        return Cutoff("minus_k", k, 0, a, 2.0 ** (k - 2) * self.scales[0], (-2.0, -1.0))

    def extended(self) -> np.ndarray:
        a = self.a_sorted
        return np.concatenate([[a[0] - self.scales[0]], a, [a[-1] + self.scales[1]]])

    def center_piece(self, nu: int, k: int, sign: int) -> Optional[Cutoff]:
        """Interior piece chi_{0,nu,k}^{+/-}, k <= -1; None when it is trivial."""
        if k > -1:
            raise DomainError("interior cutoffs use k <= -1")
        e = self.extended()
        if sign > 0:
            gap = e[nu + 1] - e[nu]
            if gap <= 0:
                return None
            return Cutoff("center_plus_nuk", k, nu, e[nu], 2.0 ** (k - 1) * gap, (1.0, 2.0))
        gap = e[nu] - e[nu - 1]
        if gap <= 0:
            return None
        return Cutoff("center_minus_nuk", k, nu, e[nu], 2.0 ** (k - 1) * gap, (-2.0, -1.0))

    def descriptors(self, k_max: int = 40, level: str = "coarse", k_min: int = -60) -> list:
        """Enumerate the pieces needed to cover samples in a bounded range."""
        out: list = []
        if level == "coarse":
            out.append(self.center)
        else:
            for nu in range(1, len(self.a_sorted) + 1):
                for k in range(-1, k_min - 1, -1):
                    for sign in (1, -1):
                        c = self.center_piece(nu, k, sign)
                        if c is not None:
                            out.append(c)
        for k in range(1, k_max + 1):
            out.append(self.plus(k))
            out.append(self.minus(k))
        return out

    def locate(self, xi: float, level: str = "coarse"):
        """The piece containing ``xi``; None only at an interior anchor a_nu."""
        if self.center(xi):
            if level == "coarse":
                return self.center
            e = self.extended()
            for nu in range(1, len(self.a_sorted) + 1):
                if xi == e[nu]:
                    continue
                for sign in (1, -1):
                    gap = (e[nu + 1] - e[nu]) if sign > 0 else (e[nu] - e[nu - 1])
                    if gap <= 0:
                        continue
                    y = abs(xi - e[nu]) / gap
                    if y == 0 or y > 0.5:
                        continue
                    k0 = int(math.floor(math.log2(y))) + 1
                    for k in (k0 - 1, k0, k0 + 1):
                        if k <= -1:
                            c = self.center_piece(nu, k, sign)
                            if c is not None and c(xi):
                                return c
            return None
        right = xi > self.a_sorted[-1]
        s = self.scales[1] if right else self.scales[0]
        a = self.a_sorted[-1] if right else self.a_sorted[0]
        y = abs(xi - a) / s
        k0 = int(math.ceil(math.log2(y))) + 1
        for k in (k0 - 1, k0, k0 + 1):
            if k >= 1:
                c = self.plus(k) if right else self.minus(k)
                if c(xi):
                    return c
        raise NumericalError(f"no cutoff located for xi={xi}")


def _polish(coeffs: np.ndarray, r: np.ndarray, steps: int = 3) -> np.ndarray:
    d = npoly.polyder(coeffs)
    for _ in range(steps):
        dv = npoly.polyval(r, d)
        ok = dv != 0
        r = np.where(ok, r - npoly.polyval(r, coeffs) / np.where(ok, dv, 1.0), r)
    return r


def qb_roots(params: MultiplierParams) -> RootDecomposition:
    """Roots of Q_b from companion-matrix eigenvalues, Newton polished."""
    coeffs = params.Qb_coeffs
    if not np.all(np.isfinite(coeffs)):
        raise DomainError("Q_b coefficients must be finite")
    roots = npoly.polyroots(coeffs).astype(complex)
    roots = _polish(coeffs.astype(complex), roots)
    n = 2 * params.m - 1
    bound = 1e-8 * (1 + np.abs(roots)) ** n
    resid = np.abs(npoly.polyval(roots, coeffs))
    if np.any(resid > bound):
        worst = int(np.argmax(resid / bound))
        raise NumericalError(
            f"root residual {resid[worst]:.2e} exceeds {bound[worst]:.2e} at {roots[worst]}; "
            f"companion condition {np.linalg.cond(npoly.polycompanion(coeffs)):.2e}"
        )
    a = np.sort(roots.real)
    # a zero anchor has no natural scale; unit scale keeps the pieces well defined
    s_lo = abs(a[0]) if a[0] != 0 else 1.0
    s_hi = abs(a[-1]) if a[-1] != 0 else 1.0
    dec = RootDecomposition(roots, a, [], (s_lo, s_hi))
    object.__setattr__(dec, "cutoff_descriptors", dec.descriptors(k_max=8))
    return dec


def partition_count(dec: RootDecomposition, xi: np.ndarray, level: str = "coarse") -> np.ndarray:
    """Number of enumerated pieces containing each sample."""
    xi = np.asarray(xi, dtype=float)
    span = float(np.max(np.abs(xi - dec.a_sorted.mean()))) + 1.0
    k_max = int(math.ceil(math.log2(span / min(dec.scales)))) + 3
    total = np.zeros_like(xi)
    for d in dec.descriptors(k_max=max(k_max, 1), level=level):
        total += d(xi)
    return total


def smooth_step(y):
    """C^2 transition from 0 (y <= 0) to 1 (y >= 1)."""
    y = np.clip(y, 0.0, 1.0)
    return y ** 3 * (10 - 15 * y + 6 * y ** 2)


def phi_plus(y):
    """C^2 bump equal to 1 on [1, 2], supported in [0.6, 2.4]."""
    y = np.asarray(y, dtype=float)
    # measured from the plateau ends so that phi is exactly 1 on [1, 2]
    v = smooth_step(1.0 + (y - 1.0) / 0.4) * smooth_step(1.0 + (2.0 - y) / 0.4)
    return np.where((y > 0.6) & (y < 2.4), v, 0.0)


def phi_plus_k(dec: RootDecomposition, k: int, xi):
    a = dec.a_sorted[-1]
    return phi_plus((np.asarray(xi) - a) / (2.0 ** (k - 2) * dec.scales[1]))


# frames ------------------------------------------------------------------

@dataclass(frozen=True)
class Frame:
    """Affine frequency map (sigma, eta) -> (tau, xi).

    ``xi = xi0 + (eta + eta_off) / a_x`` and
    ``tau = tau0 + (sigma + sigma_off) / a_t - shear * (eta + eta_off) / a_x``.
    """

    tau0: float = 0.0
    xi0: float = 0.0
    shear: float = 0.0
    a_t: float = 1.0
    a_x: float = 1.0
    sigma_off: float = 0.0
    eta_off: float = 0.0
    label: str = "lab"

    def map(self, sigma, eta):
        e = (eta + self.eta_off) / self.a_x
        return self.tau0 + (sigma + self.sigma_off) / self.a_t - self.shear * e, self.xi0 + e

    def map_x(self, eta):
        return self.xi0 + (eta + self.eta_off) / self.a_x

    def norm_factor(self, p: float, pp: float) -> float:
        return (self.a_t * self.a_x) ** (1.0 / pp - 1.0 / p)


LAB = Frame()


def _half_cell(grid: Grid2D) -> tuple[float, float]:
    return 0.5 * grid.t_axis.dxi, 0.5 * grid.x_axis.dxi


def root_frames(params: MultiplierParams, grid: Grid2D, dec: RootDecomposition | None = None) -> list[Frame]:
    """Frames centred on each real root of Q_b, where the symbol is singular.

    Near such a root the denominator is ``dtau + P' d + A d^2 + i B d``
    (``d = xi - root``).  Shear removes ``P'``; the dilation then maps it to
    ``kappa (sigma + sgn(A) eta^2 + 2 i sgn(B) eta)``.
    """
    dec = dec or qb_roots(params)
    so, eo = _half_cell(grid)
    d1 = npoly.polyder(params.P_coeffs)
    d2 = npoly.polyder(d1)
    d3 = npoly.polyder(d2)
    dq = npoly.polyder(params.Qb_coeffs)
    frames = []
    for r in dec.real_roots:
        A = 0.5 * npoly.polyval(r, d2)
        B = npoly.polyval(r, dq)
        if B == 0:
            continue
        if abs(A) > 1e-12 * (1 + abs(B)):
            s = abs(B) / (2 * abs(A))
        else:
            C = abs(npoly.polyval(r, d3)) / 6.0
            s = math.sqrt(abs(B) / C) if C > 0 else 1.0
        kappa = abs(B) * s / 2.0
        frames.append(Frame(-float(npoly.polyval(r, params.P_coeffs)), float(r),
                            float(npoly.polyval(r, d1)), 1.0 / kappa, 1.0 / s, so, eo,
                            label=f"root {r:.6g}"))
    return frames


def resolvent_frame(m: int, z: complex, grid: Grid2D) -> Frame:
    """Frame for 1/(tau + P + z): modulate away Re z, parabolic scaling by |Im z|."""
    params = pq_split(m, 0.0)
    A = 0.5 * npoly.polyval(0.0, npoly.polyder(params.P_coeffs, 2))
    beta = abs(z.imag)
    s = math.sqrt(beta / abs(A))
    so, eo = _half_cell(grid)
    return Frame(-z.real - float(params.P_coeffs[0]), 0.0, 0.0, 1.0 / beta, 1.0 / s, so, eo,
                 label="resolvent")


def cutoff_frame(params: MultiplierParams, cutoff, grid: Grid2D) -> Frame:
    """Frame centred on a cutoff interval, dilated so the interval spans ~4 units."""
    lo, hi = cutoff.interval
    mid = 0.5 * (lo + hi)
    width = hi - lo
    d1 = npoly.polyder(params.P_coeffs)
    a_x = 4.0 / width
    so, eo = _half_cell(grid)
    return Frame(-float(params.P(mid)), mid, float(npoly.polyval(mid, d1)), 1.0, a_x, so, eo,
                 label=f"{cutoff.kind} {cutoff.k}")


# application -------------------------------------------------------------

def _check_grid(f: ComplexField) -> Grid2D:
    if not isinstance(f.grid, Grid2D):
        raise DomainError("multiplier needs a (t, x) field")
    return f.grid


def _guard(den: np.ndarray, tau: np.ndarray, xi: np.ndarray) -> None:
    mag = np.abs(den)
    i = int(np.argmin(mag))
    if mag.flat[i] < SINGULAR_GUARD:
        raise SingularityError(
            f"|denominator| = {mag.flat[i]:.2e} below {SINGULAR_GUARD:g} at "
            f"(tau, xi) = ({tau.flat[i]:.6g}, {xi.flat[i]:.6g})",
            cell=(float(tau.flat[i]), float(xi.flat[i])),
        )


def mb_symbol(params: MultiplierParams, grid: Grid2D, frame: Frame = LAB) -> np.ndarray:
    sig, eta = grid.freq_mesh()
    tau, xi = frame.map(sig, eta)
    den = tau + params.P(xi) + 1j * params.Q(xi)
    _guard(den, tau, xi)
    return 1.0 / den


def resolvent_symbol(m: int, z: complex, grid: Grid2D, frame: Frame = LAB) -> np.ndarray:
    params = pq_split(m, 0.0)
    sig, eta = grid.freq_mesh()
    tau, xi = frame.map(sig, eta)
    den = tau + params.P(xi) + z
    _guard(den, tau, xi)
    return 1.0 / den


def _cutoff_mask(cutoff, grid: Grid2D, frame: Frame) -> np.ndarray:
    xi = frame.map_x(grid.x_axis.freqs)
    return cutoff(xi)[None, :]


def apply_Mb(f: ComplexField, params: MultiplierParams, cutoff=None, frame: Frame = LAB) -> ComplexField:
    grid = _check_grid(f)
    sym = mb_symbol(params, grid, frame)
    if cutoff is not None:
        sym = sym * _cutoff_mask(cutoff, grid, frame)
    return f.with_samples(inverse_array(sym * forward_array(f.samples, grid), grid))


def apply_cutoff(f: ComplexField, cutoff, frame: Frame = LAB) -> ComplexField:
    grid = _check_grid(f)
    mask = _cutoff_mask(cutoff, grid, frame)
    return f.with_samples(inverse_array(mask * forward_array(f.samples, grid), grid))


def _ratio(sym: np.ndarray, f: ComplexField, p: float, pp: float, mask=None) -> float:
    grid = f.grid
    F = forward_array(f.samples, grid)
    if mask is not None:
        F = F * mask
        den_field = inverse_array(F, grid)
    else:
        den_field = f.samples
    denom = lp_norm_array(den_field, grid.cell, p)
    if denom <= 1e-300:
        return 0.0
    num = lp_norm_array(inverse_array(sym * F, grid), grid.cell, pp)
    return num / denom


def _check_ensemble(ensemble: Sequence[ComplexField]) -> None:
    if len(ensemble) == 0:
        raise DomainError("ensemble must not be empty")
    for f in ensemble:
        _check_grid(f)
        if np.max(np.abs(f.samples)) == 0.0:
            raise DomainError("ensemble members must be nonzero")


@dataclass(frozen=True)
class NormEstimate:
    value: float
    frame: str
    member: int


def empirical_pq_estimate(params: MultiplierParams, ensemble: Sequence[ComplexField], cutoff=None,
                          frames: Iterable[Frame] | None = None) -> NormEstimate:
    _check_ensemble(ensemble)
    grid = ensemble[0].grid
    if frames is None:
        frames = [LAB] + root_frames(params, grid)
        if cutoff is not None and not isinstance(cutoff, CenterCutoff):
            frames.append(cutoff_frame(params, cutoff, grid))
    p, pp = params.p_leb, params.pprime_leb
    best = NormEstimate(0.0, "none", -1)
    for fr in frames:
        sym = mb_symbol(params, grid, fr)
        mask = None if cutoff is None else _cutoff_mask(cutoff, grid, fr)
        fac = fr.norm_factor(p, pp)
        for i, f in enumerate(ensemble):
            r = fac * _ratio(sym, f, p, pp, mask)
            if r > best.value:
                best = NormEstimate(r, fr.label, i)
    return best


def empirical_pq_norm(params: MultiplierParams, ensemble: Sequence[ComplexField], cutoff=None,
                      frames: Iterable[Frame] | None = None) -> float:
    """Largest observed ||M_b f||_{p'} / ||f||_p (cutoff-filtered if given).

    ``frames`` defaults to the lab frame plus one frame per real root of Q_b
    (and one centred on the cutoff interval when a cutoff is given).
    """
    return empirical_pq_estimate(params, ensemble, cutoff, frames).value


def frozen_resolvent_norm(m: int, z: complex, ensemble: Sequence[ComplexField],
                          frames: Iterable[Frame] | None = None) -> float:
    """Largest observed L^p -> L^p' ratio of 1/(tau + P(xi) + z)."""
    z = complex(z)
    if z.imag == 0:
        raise DomainError("z must be off the real axis")
    _check_ensemble(ensemble)
    grid = ensemble[0].grid
    if frames is None:
        frames = [LAB, resolvent_frame(m, z, grid)]
    p = (4 * m + 2) / (4 * m + 1)
    pp = float(4 * m + 2)
    best = 0.0
    for fr in frames:
        sym = resolvent_symbol(m, z, grid, fr)
        fac = fr.norm_factor(p, pp)
        for f in ensemble:
            best = max(best, fac * _ratio(sym, f, p, pp))
    return best


# ensembles ---------------------------------------------------------------

ENSEMBLE_WIDTHS = (0.5, 1.0, 2.0)
ENSEMBLE_CHIRPS = (0.5, 2.0)
ENSEMBLE_CARRIERS = (1.0, 2.0, 4.0)


def default_ensemble(grid: Grid2D, seed: int = 0) -> list[ComplexField]:
    """Eight real, time-even test functions.

    Gaussians at three widths, two chirps and three modulated bumps.  The seed
    only moves the spatial centres (uniform in [-1/2, 1/2]).
    """
    rng = np.random.default_rng(seed)
    shifts = rng.uniform(-0.5, 0.5, size=8)
    t, x = grid.mesh()
    out = []
    j = 0
    for w in ENSEMBLE_WIDTHS:
        xs = x - shifts[j]
        out.append(ComplexField(grid, np.exp(-(t ** 2 + xs ** 2) / (2 * w ** 2))))
        j += 1
    for rate in ENSEMBLE_CHIRPS:
        xs = x - shifts[j]
        out.append(ComplexField(grid, np.exp(-(t ** 2 + xs ** 2) / 2) * np.cos(rate * xs ** 2)))
        j += 1
    for k in ENSEMBLE_CARRIERS:
        xs = x - shifts[j]
        out.append(ComplexField(grid, np.exp(-(t ** 2 + xs ** 2) / 2) * np.cos(k * xs)))
        j += 1
    return out


def b_sweep_values(count: int = 13, lo_exp: float = -3.0, hi_exp: float = 3.0) -> np.ndarray:
    """Alternating-sign log grid: b_j = (-1)^j 10^(lo + j (hi - lo)/(count - 1))."""
    j = np.arange(count)
    return ((-1.0) ** j) * 10.0 ** (lo_exp + j * (hi_exp - lo_exp) / (count - 1))


# oscillatory integrals and dispersion --------------------------------------

@dataclass(frozen=True)
class DecayReport:
    s: np.ndarray
    magnitudes: np.ndarray
    slope: float
    method: str


def log_slope(s, y) -> float:
    slope, _ = np.polyfit(np.log(np.asarray(s, float)), np.log(np.asarray(y, float)), 1)
    return float(slope)


def _gl(a, b, panels, order=32):
    g, gw = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    h = np.diff(edges)
    return ((edges[:-1, None] + 0.5 * h[:, None] * (g + 1)).ravel(),
            (0.5 * h[:, None] * gw).ravel())


def _contour_integral(P: np.ndarray, m: int, s: float, x: float, center: float, panels: int) -> complex:
    # rotate about a real point onto arg = -pi/(4m), where the top term decays
    rot = np.exp(-1j * np.pi / (4 * m))
    rmax = (60.0 / s) ** (1.0 / (2 * m))
    r, w = _gl(-rmax, rmax, panels)
    xi = center + r * rot
    expo = -1j * s * npoly.polyval(xi, P) + 1j * x * xi
    if np.max(expo.real) > 30:
        raise NumericalError("contour integrand grows too large; cancellation would dominate")
    return complex(rot * np.sum(np.exp(expo) * w))


def _damped_integral(P: np.ndarray, m: int, s: float, x: float, panels: int) -> complex:
    # Richardson in the damping delta of exp(-delta xi^{2m})
    vals = []
    delta = 0.25 * s
    for d in (delta, delta / 2, delta / 4):
        xmax = (40.0 / d) ** (1.0 / (2 * m))
        xi, w = _gl(-xmax, xmax, panels)
        vals.append(complex(np.sum(np.exp(-1j * s * npoly.polyval(xi, P) + 1j * x * xi - d * xi ** (2 * m)) * w)))
    r1 = 2 * vals[1] - vals[0]
    r2 = 2 * vals[2] - vals[1]
    return (4 * r2 - r1) / 3


def oscillatory_integral(m: int, s: float, x: float = 0.0, panels: int = 64, method: str = "auto") -> complex:
    """int exp(-i s P(xi) + i x xi) dxi with the P of :func:`pq_split`."""
    if not s > 0:
        raise DomainError("s must be positive")
    P = pq_split(m, 0.0).P_coeffs
    if method == "auto":
        method = "contour" if (x == 0 or m == 1) else "damped"
    if method == "contour":
        center = x / (2 * s) if m == 1 else 0.0
        if m > 1 and x != 0:
            raise DomainError("contour method needs x = 0 for m > 1")
        return _contour_integral(P, m, s, x, center, panels)
    if method == "damped":
        return _damped_integral(P, m, s, x, panels)
    raise DomainError(f"unknown method {method!r}")


def vdc_decay(m: int, x: float, s_list: Sequence[float], method: str = "auto",
              panels: int = 64, rtol: float = 1e-2) -> DecayReport:
    """|I(s)| over ``s_list`` and the fitted log-log slope.

    Each value is recomputed with twice the panels; a relative change above
    ``rtol`` raises :class:`NumericalError`.
    """
    s = np.asarray(s_list, dtype=float)
    if s.size < 2 or np.any(s <= 0):
        raise DomainError("s_list needs at least two positive values")
    if math.log10(s.max() / s.min()) < 2 - 1e-9:
        raise DomainError("s_list must span at least two decades")
    used = method if method != "auto" else ("contour" if (x == 0 or m == 1) else "damped")
    mags = []
    for sv in s:
        a = oscillatory_integral(m, sv, x, panels, used)
        b = oscillatory_integral(m, sv, x, 2 * panels, used)
        if abs(a - b) > rtol * abs(b):
            raise NumericalError(f"quadrature at s={sv:g} changed by {abs(a - b) / abs(b):.2e} on refinement")
        mags.append(abs(b))
    mags = np.array(mags)
    return DecayReport(s, mags, log_slope(s, mags), used)


def predicted_dispersive_slope(m: int) -> float:
    p = (4 * m + 2) / (4 * m + 1)
    pp = 4 * m + 2
    return -(1.0 / (2 * m)) * (1.0 / p - 1.0 / pp)


def dispersive_ratio(s: float, m: int, f: ComplexField) -> float:
    grid = f.grid
    if not isinstance(grid, Grid1D):
        raise DomainError("dispersive_norm needs 1-D fields")
    P = pq_split(m, 0.0)
    p, pp = P.p_leb, P.pprime_leb
    sym = np.exp(-1j * s * P.P(grid.freqs))
    u = inverse_array(sym * forward_array(f.samples, grid), grid)
    return lp_norm_array(u, grid.dx, pp) / lp_norm(f, p)


def dispersive_norm(s: float, m: int, ensemble: Sequence[ComplexField]) -> float:
    """Largest ||exp(-i s P(D)) f||_{p'} / ||f||_p over the ensemble."""
    if s == 0:
        raise DomainError("s must be nonzero")
    if len(ensemble) == 0:
        raise DomainError("ensemble must not be empty")
    return max(dispersive_ratio(s, m, f) for f in ensemble)


def dilated_gaussians(grid: Grid1D, w_min: float, w_max: float, step: float = 2 ** 0.25) -> list[ComplexField]:
    count = int(math.floor(math.log(w_max / w_min) / math.log(step))) + 1
    widths = w_min * step ** np.arange(count)
    return [ComplexField(grid, np.exp(-grid.x ** 2 / (2 * w ** 2))) for w in widths]


def dispersive_sweep(m: int, s_list: Sequence[float], ensemble: Sequence[ComplexField]) -> DecayReport:
    s = np.asarray(s_list, dtype=float)
    env = np.array([dispersive_norm(sv, m, ensemble) for sv in s])
    return DecayReport(s, env, log_slope(s, env), "envelope")
