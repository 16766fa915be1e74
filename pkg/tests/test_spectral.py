import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from ssfm_stability.spectral import FieldState, Grid, build_grid, forward_ft, inverse_ft, resonance_info


@pytest.mark.parametrize(
    "T, N, dw, wmax",
    [(32 * math.pi, 1024, 0.0625, 32.0), (128 * math.pi, 4096, 1 / 64, 32.0), (2 * math.pi, 8, 1.0, 4.0)],
)
def test_grid_spacing(T, N, dw, wmax):
    g = build_grid(T, N)
    assert g.dt * g.N == pytest.approx(T, rel=1e-15)
    assert g.d_omega == pytest.approx(dw, rel=1e-14)
    assert g.omega_max == pytest.approx(wmax, rel=1e-14)
    assert g.omega[-1] == pytest.approx(wmax, rel=1e-14)


def test_small_lattice_indices():
    g = build_grid(2 * math.pi, 8)
    assert g.ell.tolist() == [-3, -2, -1, 0, 1, 2, 3, 4]
    assert np.all(np.diff(g.omega) > 0)


def test_samples_on_half_open_window():
    g = build_grid(10.0, 10)
    assert g.t[0] > -5.0 and g.t[-1] == pytest.approx(5.0)
    assert 0.0 in g.t


@pytest.mark.parametrize("T, N", [(0.0, 16), (-1.0, 16), (1.0, 4), (1.0, 15), (1.0, 16.5)])
def test_grid_rejects_bad_input(T, N):
    with pytest.raises(ValueError):
        Grid(T, N)


def test_native_ordering_is_bijective():
    g = build_grid(3.0, 64)
    assert sorted(g.native_index.tolist()) == list(range(64))
    x = np.arange(64.0)
    assert np.array_equal(g.to_sorted(g.to_native(x)), x)
    assert np.array_equal(g.to_native(g.to_sorted(x)), x)
    assert g.omega_native[0] == 0.0


@pytest.mark.parametrize("ell", [1, 5, -7])
def test_lattice_exponential_is_single_bin(ell):
    g = build_grid(32 * math.pi, 256)
    w1 = ell * g.d_omega
    for sign in (1, -1):
        spec = forward_ft(np.exp(sign * 1j * w1 * g.t), g)
        i = g.bin_of(sign * w1)
        assert spec[i] == pytest.approx(g.T, rel=1e-12)
        rest = np.delete(spec, i)
        assert np.abs(rest).max() < 1e-10 * g.T


def test_sech_squared_transform_at_zero():
    g = build_grid(128 * math.pi, 4096)
    exact, _ = integrate.quad(lambda t: 1 / np.cosh(t) ** 2, -60.0, 60.0, epsabs=1e-14)
    assert exact == pytest.approx(2.0, rel=1e-12)
    spec = forward_ft(1 / np.cosh(g.t) ** 2, g)
    assert spec[g.bin_of(0.0)].real == pytest.approx(exact, rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 9), st.floats(0.5, 500.0), st.integers(0, 2**31))
def test_round_trip_and_parseval(log2n, T, seed):
    g = build_grid(T, 2**log2n)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(g.N) + 1j * rng.standard_normal(g.N)
    spec = forward_ft(FieldState(u), g)
    back = inverse_ft(spec, g)
    assert np.linalg.norm(back - u) <= 1e-12 * np.linalg.norm(u)
    assert np.sum(np.abs(u) ** 2) * g.dt == pytest.approx(np.sum(np.abs(spec) ** 2) / g.T, rel=1e-10)


def test_transform_accepts_stacked_rows():
    g = build_grid(5.0, 32)
    rows = np.random.default_rng(0).standard_normal((3, 32)) + 0j
    out = forward_ft(rows, g)
    assert np.allclose(out[1], forward_ft(rows[1], g))
    with pytest.raises(ValueError):
        forward_ft(np.zeros(31), g)


def test_field_state_validates_shape():
    with pytest.raises(ValueError):
        FieldState(np.zeros((2, 2)))
    f = FieldState(np.array([3, 4j]))
    assert f.power == pytest.approx(25.0)
    assert f.is_finite()


def test_resonance_values():
    g32 = build_grid(32 * math.pi, 1024)
    assert resonance_info(-1, 0.0040, g32).omega_pi == pytest.approx(28.03, abs=0.01)
    assert resonance_info(-1, 0.0040, g32).dz_thresh == pytest.approx(0.0031, abs=0.00005)
    r = resonance_info(-1, 0.0043, build_grid(128 * math.pi, 4096))
    assert r.omega_pi == pytest.approx(27.03, abs=0.005)
    assert r.delta_omega_pi == pytest.approx(0.0140, abs=0.00005)
    assert r.epsilon == pytest.approx(1 / r.omega_pi)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-4, 0.1), st.floats(0.1, 5.0), st.floats(10.0, 1000.0))
def test_resonance_identities(dz, beta_abs, T):
    g = build_grid(T, 64)
    r = resonance_info(-beta_abs, dz, g)
    for k in (1, 2, 3):
        assert beta_abs * r.omega_k_pi(k) ** 2 * dz == pytest.approx(k * math.pi, rel=1e-13)
    assert r.omega_k_pi(2) / r.omega_k_pi(1) == pytest.approx(math.sqrt(2), rel=1e-14)
    assert 0 <= r.delta_omega_pi < g.d_omega
    assert r.N_pi * g.d_omega + r.delta_omega_pi == pytest.approx(r.omega_pi, rel=1e-12)


def test_resonance_listing_stays_on_grid():
    g = build_grid(32 * math.pi, 1024)
    r = resonance_info(-1, 0.02, g)
    assert r.k_max == len(r.resonances()) >= 2
    assert all(w <= g.omega_max for w in r.resonances())
    assert resonance_info(-1, 0.0030, g).k_max == 0


def test_resonance_rejects_bad_input():
    g = build_grid(1.0, 16)
    with pytest.raises(ValueError):
        resonance_info(0.0, 0.01, g)
    with pytest.raises(ValueError):
        resonance_info(-1.0, 0.0, g)
