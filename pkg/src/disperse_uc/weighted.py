"""Weighted L2 norms with exp(gamma |x|^p) weights and the checks built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError, NumericalError
from .evolve import analytic_propagate
from .grid import ComplexField, Grid1D

# the accumulated squared norm must stay below half the largest double
LOG_OVERFLOW = math.log(np.finfo(float).max / 2.0)


@dataclass(frozen=True)
class WeightParams:
    m: int
    gamma: float
    p_dec: float = field(init=False)

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m}")
        if not self.gamma > 0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "p_dec", 2 * self.m / (2 * self.m - 1))


def log_weighted_sq(values: np.ndarray, x: np.ndarray, gamma: float, p: float, cell: float) -> float:
    """log of sum exp(2 gamma |x|^p) |u|^2 * cell; -inf for the zero field."""
    a = np.abs(values)
    nz = a > 0
    if not np.any(nz):
        return -np.inf
    expo = 2.0 * gamma * np.abs(x[nz]) ** p + 2.0 * np.log(a[nz])
    return float(logsumexp(expo) + math.log(cell))


def log_weighted_norm(u: ComplexField, w: WeightParams) -> float:
    """log of the weighted norm; +inf past the overflow threshold."""
    ls = log_weighted_sq(u.samples, u.grid.x, w.gamma, w.p_dec, u.grid.dx)
    if ls > LOG_OVERFLOW:
        return np.inf
    return 0.5 * ls


def weighted_norm(u: ComplexField, w: WeightParams) -> float:
    if not isinstance(u.grid, Grid1D):
        raise DomainError("weighted_norm needs a 1-D field")
    ln = log_weighted_norm(u, w)
    return float(np.exp(ln)) if np.isfinite(ln) else (0.0 if ln < 0 else np.inf)


def boundary_fraction(u: ComplexField, w: WeightParams) -> float:
    """Weighted integrand at the grid edge relative to its maximum."""
    a = np.abs(u.samples)
    with np.errstate(divide="ignore"):
        expo = 2.0 * w.gamma * np.abs(u.grid.x) ** w.p_dec + 2.0 * np.log(a)
    top = np.max(expo)
    if not np.isfinite(top):
        return 0.0
    edge = max(expo[0], expo[-1])
    return float(np.exp(edge - top))


def theta(A: float, B: float, gamma: float, m: int, N2: float) -> float:
    """Reduced weight exponent after analytic smoothing for complex time A + iB."""
    if not A > 0:
        raise DomainError(f"A must be positive, got {A}")
    if not gamma > 0 or not N2 > 0:
        raise DomainError("gamma and N2 must be positive")
    k = 2 * m - 1
    # log-space for the power; large B/A overflows the direct form
    log_den_term = math.log(N2) + math.log(A) + m * math.log1p((B / A) ** 2) + k * math.log(gamma)
    if log_den_term > 700:
        return gamma * math.exp(-log_den_term / k)
    return gamma / (1.0 + math.exp(log_den_term)) ** (1.0 / k)


@dataclass(frozen=True)
class TransferResult:
    A: float
    B: float
    N2: float
    theta: float
    lhs: float
    rhs: float
    ratio: float
    boundary_fraction: float


@dataclass(frozen=True)
class TransferSweep:
    N2: float
    rows: list[TransferResult]

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r.ratio for r in self.rows])

    @property
    def band(self) -> float:
        r = self.ratios
        return float(r.max() / r.min())


N2_GRID = np.logspace(-3, 9, 121)
FINITE_FRACTION = 1e-10


def _transfer_row(f: ComplexField, gamma: float, m: int, A: float, B: float, N2: float,
                  rhs_base: float) -> TransferResult:
    th = theta(A, B, gamma, m, N2)
    u = analytic_propagate(f, A, B, m)
    wt = WeightParams(m, th)
    lhs = weighted_norm(u, wt)
    # N1 = 1, omega = 0, dimension 1
    rhs = math.sqrt(1.0 + (B / A) ** 2) * rhs_base
    ratio = lhs / rhs if rhs > 0 else 0.0
    return TransferResult(A, B, N2, th, lhs, rhs, ratio, boundary_fraction(u, wt))


def _rhs_base(f: ComplexField, gamma: float, m: int) -> float:
    base = weighted_norm(f, WeightParams(m, gamma))
    if not np.isfinite(base):
        raise DomainError("weighted norm of the data is infinite")
    return base


def smoothing_weight_transfer_check(
    f: ComplexField, gamma: float, m: int, A: float, B: float, grid: Grid1D | None = None,
    N2: float | None = None,
) -> TransferResult:
    """Weighted norm of exp(-(A+iB) D^{2m}) f with the reduced exponent theta.

    With ``N2`` omitted the smallest value on a log grid for which the
    weighted integrand is negligible at the domain edge is used.
    """
    if grid is not None and grid != f.grid:
        raise DomainError("field is not on the given grid")
    base = _rhs_base(f, gamma, m)
    if base == 0.0:
        return TransferResult(A, B, N2 or 1.0, gamma, 0.0, 0.0, 0.0, 0.0)
    if N2 is not None:
        return _transfer_row(f, gamma, m, A, B, N2, base)
    for cand in N2_GRID:
        row = _transfer_row(f, gamma, m, A, B, float(cand), base)
        if np.isfinite(row.lhs) and row.boundary_fraction < FINITE_FRACTION:
            return row
    raise NumericalError(f"no N2 on the search grid keeps the smoothed norm finite (A={A}, B={B})")


def transfer_sweep(f: ComplexField, gamma: float, m: int, A_list: Sequence[float],
                   B_list: Sequence[float]) -> TransferSweep:
    """Fit one N2 valid for every (A, B) and report the ratio band."""
    fits = [smoothing_weight_transfer_check(f, gamma, m, A, B) for A in A_list for B in B_list]
    N2 = max(r.N2 for r in fits)
    base = _rhs_base(f, gamma, m)
    rows = [_transfer_row(f, gamma, m, A, B, N2, base) for A in A_list for B in B_list]
    return TransferSweep(N2, rows)


# subordination -------------------------------------------------------------

@dataclass(frozen=True)
class SubordinationReport:
    p_dec: float
    x: np.ndarray
    ratios: np.ndarray
    band: float
    max_error_estimate: float


def _gl_panels(a: float, b: float, panels: int, order: int = 32):
    g, gw = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    h = np.diff(edges)
    nodes = (edges[:-1, None] + 0.5 * h[:, None] * (g + 1.0)).ravel()
    weights = (0.5 * h[:, None] * gw).ravel()
    return nodes, weights


def _sub_exponent(lam, x, p, q):
    a = np.abs(lam)
    out = lam * x - a ** q / q - abs(x) ** p / p
    if q != 2.0:
        with np.errstate(divide="ignore"):
            out = out + 0.5 * (q - 2.0) * np.log(a)
    return out


def _truncation(x, p, q, drop=math.log(1e18)):
    # walk outward from the stationary point until the exponent falls by `drop`
    center = math.copysign(abs(x) ** (p - 1.0), x) if x != 0 else 0.0
    top = max(float(_sub_exponent(np.array([center + 1e-300]), x, p, q)[0]), 0.0)
    ends = []
    for sgn in (-1.0, 1.0):
        step = 1.0
        lam = center + sgn * step
        # lam = 0 is a zero of the weight for q > 2, not the end of the range
        while lam == 0.0 or _sub_exponent(np.array([lam]), x, p, q)[0] > top - drop:
            step *= 1.5
            lam = center + sgn * step
        ends.append(lam)
    return ends[0], ends[1]


def _log_integral(x: float, p: float, q: float, panels: int) -> float:
    lo, hi = _truncation(x, p, q)
    parts = []
    # the |lam|^((q-2)/2) factor is not smooth at 0; put a panel edge there
    pieces = [(lo, 0.0), (0.0, hi)] if lo < 0 < hi else [(lo, hi)]
    for a, b in pieces:
        nodes, wts = _gl_panels(a, b, panels)
        parts.append(logsumexp(_sub_exponent(nodes, x, p, q), b=wts))
    return float(logsumexp(parts))


def subordination_check(p_dec: float, x_samples: Sequence[float], panels: int = 64,
                        rtol: float = 1e-6) -> SubordinationReport:
    """Ratio of the Laplace-type integral to exp(|x|^p / p) at each sample."""
    if not 1.0 < p_dec <= 2.0:
        raise DomainError(f"p_dec must lie in (1, 2], got {p_dec}")
    x = np.asarray(x_samples, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("x samples must be finite")
    q = p_dec / (p_dec - 1.0)
    ratios, errs = [], []
    for xv in x:
        coarse = _log_integral(float(xv), p_dec, q, panels)
        fine = _log_integral(float(xv), p_dec, q, 2 * panels)
        err = abs(math.expm1(fine - coarse))
        if err > rtol:
            raise NumericalError(
                f"subordination quadrature not converged at x={xv}: relative change {err:.2e}"
            )
        ratios.append(math.exp(fine))
        errs.append(err)
    r = np.array(ratios)
    return SubordinationReport(p_dec, x, r, float(r.max() / r.min()), float(max(errs)))


# log-convexity -------------------------------------------------------------

@dataclass(frozen=True)
class ConvexityReport:
    times: np.ndarray
    log_weighted_energy: np.ndarray
    v_inf: float
    max_violation: float
    fitted_logC: float

    @property
    def chord_excess(self) -> np.ndarray:
        """G(t) minus the endpoint chord of G."""
        G = self.log_weighted_energy - 0.5 * self.times * (1 - self.times) * self.v_inf ** 2
        if not np.all(np.isfinite(G)):
            return np.zeros_like(G)
        return G - ((1 - self.times) * G[0] + self.times * G[-1])

    def passes(self, logC_tol: float, convexity_tol: float | None = None) -> bool:
        ok = self.fitted_logC <= logC_tol
        if convexity_tol is not None:
            ok = ok and self.max_violation <= convexity_tol
        return bool(ok)


def convexity_check(trajectory: Sequence[ComplexField], dt: float, w: WeightParams,
                    v_inf: float, boundary_tol: float | None = FINITE_FRACTION) -> ConvexityReport:
    """Chord test for log H(t), H(t) the squared weighted norm of frame t = k dt.

    A frame whose weighted integrand at the domain edge exceeds
    ``boundary_tol`` times its maximum is treated like an infinite norm: the
    truncated sum no longer approximates the integral.  Pass ``None`` to skip
    the guard.
    """
    if len(trajectory) < 2:
        raise DomainError("need at least two frames")
    if v_inf < 0:
        raise DomainError("v_inf must be nonnegative")
    times = dt * np.arange(len(trajectory))
    if times[-1] > 1.0 + 1e-12:
        raise DomainError(f"trajectory extends to t={times[-1]}, beyond 1")
    logH = np.empty(len(trajectory))
    for k, u in enumerate(trajectory):
        ln = log_weighted_norm(u, w)
        if ln == np.inf:
            raise DomainError(f"weighted norm is infinite at frame {k} (t={times[k]:g})")
        if boundary_tol is not None and ln > -np.inf:
            frac = boundary_fraction(u, w)
            if frac > boundary_tol:
                raise DomainError(
                    f"weighted norm not resolved at frame {k} (t={times[k]:g}): "
                    f"edge/max integrand ratio {frac:.2e} exceeds {boundary_tol:g}"
                )
        logH[k] = 2.0 * ln
    if np.all(logH == -np.inf):
        return ConvexityReport(times, logH, float(v_inf), 0.0, 0.0)
    G = logH - 0.5 * times * (1 - times) * v_inf ** 2
    chord = (1 - times) * G[0] + times * G[-1]
    logC = max(0.0, float(np.max(G - chord)))
    if len(G) >= 3:
        second = G[2:] - 2 * G[1:-1] + G[:-2]
        violation = max(0.0, float(-np.min(second)))
    else:
        violation = 0.0
    return ConvexityReport(times, logH, float(v_inf), violation, logC)
