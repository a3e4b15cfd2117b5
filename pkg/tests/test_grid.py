import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from disperse_uc.errors import DomainError
from disperse_uc.grid import (
    ComplexField,
    dft_forward,
    dft_inverse,
    from_function,
    lp_norm,
    make_grid,
    make_grid2d,
)


def test_unit_lattice():
    g = make_grid(np.pi, 8)
    assert g.dx == pytest.approx(np.pi / 4)
    np.testing.assert_allclose(g.freqs, np.arange(-4, 4), atol=1e-14)
    assert g.dx * g.n == pytest.approx(2 * np.pi)


def test_nyquist():
    g = make_grid(1.0, 8)
    assert np.max(np.abs(g.freqs)) == pytest.approx(4 * np.pi)
    assert np.max(np.abs(g.freqs)) == pytest.approx(np.pi / g.dx)


@pytest.mark.parametrize("hw,n", [(0.0, 8), (-1.0, 8), (1.0, 12), (1.0, 4), (np.inf, 8)])
def test_bad_grids(hw, n):
    with pytest.raises(DomainError):
        make_grid(hw, n)


def test_field_checks():
    g = make_grid(1.0, 8)
    with pytest.raises(DomainError):
        ComplexField(g, np.ones(7))
    with pytest.raises(DomainError):
        ComplexField(g, np.full(8, np.nan))
    f = ComplexField(g, np.ones(8))
    with pytest.raises(ValueError):
        f.samples[0] = 2.0


def test_zero_transforms():
    g = make_grid(5.0, 64)
    z = ComplexField(g, np.zeros(64))
    assert np.all(dft_forward(z).samples == 0)
    assert np.all(dft_inverse(z.with_samples(z.samples, spectral=True)).samples == 0)


def test_gaussian_transform(gauss20):
    F = dft_forward(gauss20)
    xi = gauss20.grid.freqs
    sel = np.abs(xi) <= 5
    exact = np.sqrt(2 * np.pi) * np.exp(-xi[sel] ** 2 / 2)
    assert np.max(np.abs(F.samples[sel] - exact)) <= 1e-10


def test_round_trip(gauss20):
    back = dft_inverse(dft_forward(gauss20))
    rel = np.max(np.abs(back.samples - gauss20.samples)) / np.max(np.abs(gauss20.samples))
    assert rel <= 1e-12


def test_sinc_inverse():
    # half width 400.5 pi puts |xi| = 1 midway between lattice points
    g = make_grid(400.5 * np.pi, 2 ** 17)
    F = ComplexField(g, (np.abs(g.freqs) <= 1.0).astype(float), spectral=True)
    f = dft_inverse(F)
    sel = np.abs(g.x) <= 5
    x = g.x[sel]
    exact = np.sinc(x / np.pi) / np.pi
    assert np.max(np.abs(f.samples[sel] - exact)) <= 1e-6


def test_l2_of_one():
    g = make_grid(1.0, 64)
    assert lp_norm(ComplexField(g, np.ones(64)), 2) == pytest.approx(np.sqrt(2), abs=1e-12)


def test_parseval(gauss20):
    lhs = lp_norm(gauss20, 2) ** 2
    rhs = lp_norm(dft_forward(gauss20), 2) ** 2 / (2 * np.pi)
    assert abs(lhs - rhs) <= 1e-10 * lhs


def test_lp_errors_and_inf():
    g = make_grid(1.0, 8)
    f = ComplexField(g, np.arange(8.0))
    assert lp_norm(f, np.inf) == 7.0
    with pytest.raises(DomainError):
        lp_norm(f, 0.5)


def test_two_d_cell_and_transform():
    g = make_grid2d(10.0, 128, 10.0, 128)
    assert g.cell == pytest.approx(g.t_axis.dx * g.x_axis.dx)
    f = from_function(g, lambda t, x: np.exp(-(t ** 2 + x ** 2) / 2))
    F = dft_forward(f)
    tau, xi = g.freq_mesh()
    exact = 2 * np.pi * np.exp(-(tau ** 2 + xi ** 2) / 2)
    assert np.max(np.abs(F.samples - exact)) <= 1e-10
    assert np.max(np.abs(dft_inverse(F).samples - f.samples)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.floats(0.3, 2.0))
def test_round_trip_random_smooth(coefs, width):
    g = make_grid(15.0, 256)
    x = g.x
    vals = sum(c * np.cos((k + 1) * x) for k, c in enumerate(coefs)) * np.exp(-x ** 2 / (2 * width ** 2))
    vals = vals + np.exp(-x ** 2)
    f = ComplexField(g, vals)
    back = dft_inverse(dft_forward(f))
    assert np.max(np.abs(back.samples - f.samples)) <= 1e-12 * np.max(np.abs(f.samples))
    lhs = lp_norm(f, 2) ** 2
    assert abs(lhs - lp_norm(dft_forward(f), 2) ** 2 / (2 * np.pi)) <= 1e-10 * lhs


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3), st.sampled_from([1, 1.5, 2, 6, np.inf]))
def test_homogeneity(c, p):
    g = make_grid(5.0, 64)
    f = from_function(g, lambda x: np.exp(-x ** 2) * (1 + 0.5j * x))
    assert lp_norm(f * c, p) == pytest.approx(abs(c) * lp_norm(f, p), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 1.0), st.sampled_from([1, 2, 3.5, np.inf]))
def test_monotone_in_modulus(shrink, p):
    g = make_grid(5.0, 64)
    big = from_function(g, lambda x: 1 / (1 + x ** 2))
    small = big.with_samples(big.samples * shrink * np.exp(1j * g.x))
    assert lp_norm(small, p) <= lp_norm(big, p) * (1 + 1e-14)


def test_deterministic(gauss20):
    a = dft_forward(gauss20).samples
    b = dft_forward(gauss20).samples
    assert np.array_equal(a, b)
