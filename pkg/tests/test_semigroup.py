import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.signal import fftconvolve
from scipy.special import gamma as Gamma

from disperse_uc.errors import DomainError, FitError, ResolutionError
from disperse_uc.grid import ComplexField, lp_norm, make_grid
from disperse_uc.semigroup import (
    SemigroupParams,
    dominant_component,
    fit_decay,
    kernel,
    kernel_envelope,
    required_n,
    sharpness_solution,
)


@pytest.fixture(scope="module")
def g40():
    return make_grid(40.0, 2 ** 14)


def test_params_validation():
    with pytest.raises(DomainError):
        SemigroupParams(1, 0.0)
    with pytest.raises(DomainError):
        SemigroupParams(1, -1 + 2j)
    with pytest.raises(DomainError):
        SemigroupParams(0, 1.0)
    assert SemigroupParams(3).p_dec == pytest.approx(6 / 5)


def test_heat_kernel_closed_form():
    g = make_grid(30.0, 1024)
    K = kernel(SemigroupParams(1, 1.0), g).samples
    exact = np.exp(-g.x ** 2 / 4) / np.sqrt(4 * np.pi)
    # relative accuracy where the kernel is well above the FFT roundoff floor,
    # absolute accuracy at that floor elsewhere
    sel = np.abs(exact) > 1e-6
    assert np.max(np.abs(K[sel] - exact[sel]) / exact[sel]) <= 1e-10
    assert np.max(np.abs(K - exact)) <= 1e-16
    assert K[g.n // 2].real == pytest.approx(0.28209479, abs=1e-8)
    assert np.max(np.abs(K.imag)) <= 1e-12


def test_quartic_kernel_at_origin():
    g = make_grid(30.0, 1024)
    K0 = kernel(SemigroupParams(2, 1.0), g).samples[g.n // 2].real
    oracle = quad(lambda s: np.exp(-s ** 4), -np.inf, np.inf)[0] / (2 * np.pi)
    assert K0 == pytest.approx(oracle, rel=1e-12)
    assert K0 == pytest.approx(Gamma(1.25) / np.pi, rel=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_kernel_even(m):
    g = make_grid(20.0, 512)
    K = kernel(SemigroupParams(m, 0.7), g).samples
    assert np.array_equal(K[1:], K[1:][::-1])


def test_resolution_error():
    g = make_grid(40.0, 64)
    with pytest.raises(ResolutionError) as info:
        kernel(SemigroupParams(1, 1.0), g)
    need = info.value.required_n
    assert need == required_n(40.0, 1.0, 1)
    kernel(SemigroupParams(1, 1.0), make_grid(40.0, need))


def test_sextic_kernel_against_quadrature(g40):
    K = kernel(SemigroupParams(3, 1.0), g40).samples.real
    for x in np.linspace(3, 6, 20):
        i = int(np.argmin(np.abs(g40.x - x)))
        oracle = quad(lambda s: np.exp(-s ** 6) / np.pi, 0, np.inf, weight="cos", wvar=g40.x[i])[0]
        assert abs(K[i] - oracle) <= 1e-12


def test_envelope_is_kernel_for_m1():
    g = make_grid(20.0, 512)
    p = SemigroupParams(1, 1.0)
    E = kernel_envelope(p, g).samples
    K = kernel(p, g).samples
    assert np.max(np.abs(E - K)) <= 1e-12


def test_envelope_real_part_m2():
    g = make_grid(20.0, 512)
    p = SemigroupParams(2, 1.0)
    E = kernel_envelope(p, g, x_max=10).samples
    K = kernel(p, g).samples
    sel = np.abs(g.x) <= 10
    assert np.max(np.abs(2 * E[sel].real - K[sel].real)) <= 1e-10


def test_dominant_component_has_no_zeros():
    x = np.linspace(0.5, 12, 400)
    H = dominant_component(SemigroupParams(2, 1.0), x)
    assert np.min(np.abs(H)) > 0


@pytest.mark.parametrize("m,window,tol", [(1, (3, 8), 0.02), (2, (3, 7), 0.05), (3, (3, 6), 0.05)])
def test_decay_exponent(g40, m, window, tol):
    p = SemigroupParams(m, 1.0)
    K = kernel(p, g40) if m == 1 else kernel_envelope(p, g40, x_max=window[1] + 1)
    fit = fit_decay(K, window)
    assert abs(fit.exponent - p.p_dec) <= tol * p.p_dec
    assert 0 <= fit.r_squared <= 1 and not fit.low_confidence
    assert fit.coefficient > 0 and fit.prefactor > 0


def test_oscillating_kernel_reports_zeros(g40):
    K = kernel(SemigroupParams(2, 1.0), g40)
    with pytest.raises(FitError) as info:
        fit_decay(K, (3, 7))
    locs = info.value.locations
    assert len(locs) == 2
    assert locs[0] == pytest.approx(3.4535, abs=1e-3)
    assert locs[1] == pytest.approx(6.7843, abs=1e-3)


def test_fit_window_errors(g40):
    K = kernel(SemigroupParams(1, 1.0), g40)
    with pytest.raises(DomainError):
        fit_decay(K, (5, 3))
    with pytest.raises(DomainError):
        fit_decay(K, (3, 50))
    with pytest.raises(FitError):
        # the Gaussian is below the fit floor out here
        fit_decay(K, (20, 30))


def test_fit_converges_outward(g40):
    # without correction terms the exponent approaches 4/3 as the window moves out
    E = kernel_envelope(SemigroupParams(2, 1.0), g40, x_max=31)
    near = fit_decay(E, (3, 7), corrections=0).exponent
    far = fit_decay(E, (10, 30), corrections=0).exponent
    assert abs(far - 4 / 3) < abs(near - 4 / 3)


@pytest.mark.parametrize("m", [1, 2])
def test_prefactor_band_over_z(g40, m):
    vals = []
    for z in (0.5, 1.0, 2.0):
        E = kernel_envelope(SemigroupParams(m, z), g40, x_max=8)
        vals.append(fit_decay(E, (3, 7)).prefactor * z ** (1 / (2 * m)))
    assert max(vals) / min(vals) <= 3


def test_semigroup_law():
    g = make_grid(40.0, 1024)
    K1 = kernel(SemigroupParams(2, 0.4 + 0.3j), g).samples
    K2 = kernel(SemigroupParams(2, 0.6 - 0.1j), g).samples
    K12 = kernel(SemigroupParams(2, 1.0 + 0.2j), g).samples
    conv = fftconvolve(K1, K2)[g.n // 2: g.n // 2 + g.n] * g.dx
    err = lp_norm(ComplexField(g, conv - K12), 2) / lp_norm(ComplexField(g, K12), 2)
    assert err <= 1e-8


def test_sharpness_start_and_norm():
    g = make_grid(30.0, 1024)
    u0 = sharpness_solution(0.0, 2, g)
    assert np.array_equal(u0.samples, kernel(SemigroupParams(2, 1.0), g).samples)
    n0 = lp_norm(u0, 2)
    for t in (0.3, 1.0, 2.5):
        assert lp_norm(sharpness_solution(t, 2, g), 2) == pytest.approx(n0, rel=1e-10)


def test_sharpness_gaussian_closed_form():
    g = make_grid(40.0, 1024)
    u = sharpness_solution(1.0, 1, g).samples
    exact = (4 * np.pi * (1 + 1j)) ** -0.5 * np.exp(-g.x ** 2 / (4 * (1 + 1j)))
    assert np.max(np.abs(u - exact)) <= 1e-12
    assert abs(u[g.n // 2]) == pytest.approx((4 * np.pi * math.sqrt(2)) ** -0.5, rel=1e-12)
    assert abs(u[g.n // 2]) == pytest.approx(0.23721, abs=1e-5)
