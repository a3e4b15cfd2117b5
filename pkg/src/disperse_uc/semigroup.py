"""Kernel of exp(-z D^{2m}) and stretched-exponential decay fits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, FitError, ResolutionError
from .grid import ComplexField, Grid1D, inverse_array

SYMBOL_FLOOR = 1e-14
FIT_FLOOR = 1e-13


@dataclass(frozen=True)
class SemigroupParams:
    m: int
    z: complex = 1.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m}")
        if not complex(self.z).real > 0:
            raise DomainError(f"Re z must be positive, got z={self.z}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "z", complex(self.z))

    @property
    def p_dec(self) -> float:
        return 2 * self.m / (2 * self.m - 1)


@dataclass(frozen=True)
class DecayFit:
    """Fit of ``|K(x)| ~ C exp(-c x^p)`` over ``window``.

    ``corrections`` records which slowly varying terms were included in the
    model (see :func:`fit_decay`).
    """

    exponent: float
    coefficient: float
    prefactor: float
    r_squared: float
    window: tuple[float, float]
    n_points: int
    corrections: int = 1

    @property
    def low_confidence(self) -> bool:
        return self.r_squared < 0.99


def required_n(half_width: float, re_z: float, m: int) -> int:
    """Smallest power of two whose Nyquist frequency damps the symbol below 1e-14."""
    xi_needed = (-math.log(SYMBOL_FLOOR) / re_z) ** (1.0 / (2 * m))
    n = 8
    while math.pi * n / (2 * half_width) < xi_needed:
        n *= 2
    return n


def _check_resolved(grid: Grid1D, re_z: float, m: int) -> None:
    xi_max = np.pi / grid.dx
    if math.exp(-re_z * xi_max ** (2 * m)) >= SYMBOL_FLOOR:
        need = required_n(grid.half_width, re_z, m)
        raise ResolutionError(
            f"grid n={grid.n} leaves symbol exp(-Re z xi^{2 * m}) above {SYMBOL_FLOOR} "
            f"at the Nyquist frequency; need n >= {need}",
            required_n=need,
        )


def symbol(params: SemigroupParams, freqs: np.ndarray) -> np.ndarray:
    return np.exp(-params.z * freqs ** (2 * params.m))


def kernel(params: SemigroupParams, grid: Grid1D) -> ComplexField:
    """Samples of the inverse transform of ``exp(-z xi^{2m})``."""
    _check_resolved(grid, params.z.real, params.m)
    vals = inverse_array(symbol(params, grid.freqs), grid)
    if params.z.imag == 0.0:
        # the real-z kernel is real and even; drop the roundoff residue
        # (x[0] = -half_width has no mirror point on the grid)
        vals = vals.real
        vals[1:] = 0.5 * (vals[1:] + vals[1:][::-1])
        vals = vals.astype(complex)
    return ComplexField(grid, vals)


def sharpness_solution(t: float, m: int, grid: Grid1D) -> ComplexField:
    """The free solution with initial data K(1, .), which equals K(1 + i t, .)."""
    return kernel(SemigroupParams(m, 1.0 + 1j * t), grid)


def _ray_integral(x: np.ndarray, m: int, z: complex, angle: float) -> np.ndarray:
    """(2 pi)^-1 int_0^inf exp(i x w - z w^{2m}) dw along w = s e^{i angle}."""
    smax = (60.0 / abs(z)) ** (1.0 / (2 * m))
    xmax = float(np.max(np.abs(x))) if x.size else 0.0
    panels = int(math.ceil(xmax * smax / 2.0)) + 8
    g, gw = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(0.0, smax, panels + 1)
    h = np.diff(edges)
    s = (edges[:-1, None] + 0.5 * h[:, None] * (g + 1.0)).ravel()
    w = (0.5 * h[:, None] * gw).ravel()
    rot = np.exp(1j * angle)
    ws = s * rot
    tail = np.exp(-z * ws ** (2 * m)) * w
    out = np.empty(x.shape, dtype=complex)
    # chunk to bound the size of the phase matrix
    for lo in range(0, x.size, 1024):
        xs = x[lo:lo + 1024]
        out[lo:lo + 1024] = np.exp(1j * np.outer(xs, ws)) @ tail
    return rot * out / (2.0 * np.pi)


def dominant_component(params: SemigroupParams, x: np.ndarray) -> np.ndarray:
    """Zero-free far-field component of the kernel.

    The half-line integral is deformed onto the ray at angle pi/m; the
    difference between the real half line and that ray carries the dominant
    saddle point.  For m = 1 this is the whole kernel, for m = 2 the kernel is
    twice its real part (real z), and for larger m the remainder is
    exponentially smaller in the far field.  Unlike the kernel it has no real
    zeros, so it is the object to fit decay rates on.
    """
    m, z = params.m, params.z
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    uniq, inv = np.unique(ax, return_inverse=True)
    vals = _ray_integral(uniq, m, z, 0.0) - _ray_integral(uniq, m, z, np.pi / m)
    return vals[inv].reshape(x.shape)


def kernel_envelope(params: SemigroupParams, grid: Grid1D, x_max: float | None = None) -> ComplexField:
    """:func:`dominant_component` on the grid.

    With ``x_max`` only points with ``|x| <= x_max`` are evaluated and the rest
    are set to zero, which keeps fits over a bounded window cheap.
    """
    out = np.zeros(grid.n, dtype=complex)
    sel = slice(None) if x_max is None else np.abs(grid.x) <= x_max
    out[sel] = dominant_component(params, grid.x[sel])
    return ComplexField(grid, out)


def sign_changes(x: np.ndarray, values: np.ndarray) -> list[float]:
    """Linearly interpolated locations where real ``values`` change sign."""
    s = np.sign(values)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    locs = []
    for i in idx:
        x0, x1, y0, y1 = x[i], x[i + 1], values[i], values[i + 1]
        locs.append(float(x0 - y0 * (x1 - x0) / (y1 - y0)))
    return locs


def _fit_model(x, y, corrections):
    # -log|K| = c x^p + (1 - p/2) log x + d [+ e x^-p]
    def design(p):
        cols = [x ** p, np.ones_like(x)]
        if corrections:
            cols.append(x ** (-p))
        return np.column_stack(cols)

    def target(p):
        return y - (1.0 - p / 2.0) * np.log(x) if corrections else y

    def sse(p):
        A = design(p)
        coef, *_ = np.linalg.lstsq(A, target(p), rcond=None)
        r = target(p) - A @ coef
        return float(r @ r)

    p = minimize_scalar(sse, bounds=(0.3, 4.0), method="bounded",
                        options={"xatol": 1e-12}).x
    A = design(p)
    coef, *_ = np.linalg.lstsq(A, target(p), rcond=None)
    fitted = A @ coef + (y - target(p))
    return float(p), coef, fitted


def fit_decay(K: ComplexField, window: tuple[float, float], corrections: int = 1) -> DecayFit:
    """Fit the stretched-exponential decay of ``|K|`` on ``x`` in ``window``.

    The model is ``-log|K| = c x^p + d`` plus, when ``corrections`` is
    nonzero, the Laplace-method terms ``(1 - p/2) log x + e x^-p``.  The
    exponent is found by variable projection: a bounded scalar search over p
    with linear least squares for the remaining coefficients.

    Real-valued input that changes sign inside the window raises
    :class:`FitError`; fit the zero-free :func:`kernel_envelope` instead.
    """
    lo, hi = float(window[0]), float(window[1])
    grid = K.grid
    if not isinstance(grid, Grid1D):
        raise DomainError("fit_decay needs a 1-D field")
    if not (0 < lo < hi):
        raise DomainError(f"window must satisfy 0 < x_lo < x_hi, got {window}")
    if hi > grid.x[-1]:
        raise DomainError(f"window {window} is not inside the grid")
    sel = (grid.x >= lo) & (grid.x <= hi)
    x = grid.x[sel]
    vals = K.samples[sel]
    keep = np.abs(vals) > FIT_FLOOR
    if np.count_nonzero(keep) < 8:
        raise FitError(f"fewer than 8 samples above {FIT_FLOOR} in window {window}")
    x, vals = x[keep], vals[keep]
    real = np.max(np.abs(vals.imag)) <= 1e-12 * np.max(np.abs(vals.real))
    if real:
        zeros = sign_changes(x, vals.real)
        if zeros:
            raise FitError(
                f"kernel changes sign in window {window} at x = "
                + ", ".join(f"{z:.4f}" for z in zeros),
                locations=zeros,
            )
    mag = np.abs(vals)
    y = -np.log(mag)
    p, coef, fitted = _fit_model(x, y, corrections)
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return DecayFit(
        exponent=p,
        coefficient=float(coef[0]),
        prefactor=float(np.exp(-coef[1])),
        r_squared=float(min(max(r2, 0.0), 1.0)),
        window=(lo, hi),
        n_points=int(x.size),
        corrections=corrections,
    )
