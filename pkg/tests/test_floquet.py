import math

import numpy as np
import pytest

from ssfm_stability.backgrounds import CwSpec, SolitonSpec
from ssfm_stability.floquet import build_linear_map, floquet_increments, scan_unstable_bands
from ssfm_stability.spectral import build_grid, resonance_info
from ssfm_stability.theory import cw_predict, predict_soliton_instability

SMALL = build_grid(8 * math.pi, 256)


def test_zero_background_is_unitary_diagonal():
    m = build_linear_map(None, -1, 2, 0.004, SMALL)
    fr = floquet_increments(m, SMALL, n_modes=4)
    assert np.allclose(np.abs(fr.mu), 1.0, atol=1e-12)
    assert m.K == 0.0
    # circulant in t, so diagonal in omega
    F = np.fft.fft(np.eye(SMALL.N), axis=0)
    Ahat = F @ m.A @ np.linalg.inv(F)
    assert np.abs(Ahat - np.diag(np.diag(Ahat))).max() < 1e-10
    assert np.allclose(np.abs(np.diag(Ahat)), 1.0)
    assert np.abs(m.B).max() == 0.0


def test_linear_equation_is_unitary():
    m = build_linear_map(CwSpec(1.0), -1, 0.0, 0.004, SMALL)
    fr = floquet_increments(m, SMALL, n_modes=1)
    assert np.abs(np.abs(fr.mu) - 1.0).max() < 1e-12


@pytest.mark.parametrize("bg", [SolitonSpec(), CwSpec(1.0)])
def test_structure_invariants(bg):
    g = build_grid(4 * math.pi, 64)
    m = build_linear_map(bg, -1, 2, 0.01, g)
    M = m.matrix
    sign, logdet = np.linalg.slogdet(M)
    assert abs(logdet) < 1e-8
    mu = np.linalg.eigvals(M)
    # spectrum closed under conjugation
    for x in mu:
        assert np.min(np.abs(mu - np.conj(x))) < 1e-8
    # real and complex forms have the same spectrum
    mr = np.linalg.eigvals(m.real_matrix())
    assert np.abs(mu[:, None] - mr[None, :]).min(axis=1).max() < 1e-8
    assert np.abs(mr[:, None] - mu[None, :]).min(axis=1).max() < 1e-8


def test_apply_matches_stacked_matrix():
    g = build_grid(4 * math.pi, 64)
    m = build_linear_map(SolitonSpec(), -1, 2, 0.01, g)
    w = np.random.default_rng(0).standard_normal(64) * (1 + 0.5j)
    stacked = m.matrix @ np.concatenate([w, np.conj(w)])
    assert np.allclose(stacked[:64], m.apply(w))
    assert np.allclose(stacked[64:], np.conj(m.apply(w)))


def test_map_matches_linearised_step():
    from ssfm_stability.propagator import RunConfig, split_step
    from ssfm_stability.spectral import FieldState
    from ssfm_stability.backgrounds import soliton_profile

    g = build_grid(8 * math.pi, 128)
    dz = 0.004
    ubar = soliton_profile(SolitonSpec(), -1, 2, g).samples
    w = 1e-7 * np.random.default_rng(3).standard_normal(g.N) * (1 - 0.3j)
    cfg = RunConfig(dz=dz)
    a = split_step(FieldState(ubar + w), cfg, g).samples
    b = split_step(FieldState(ubar), cfg, g).samples
    lin = np.exp(1j * dz) * build_linear_map(SolitonSpec(), -1, 2, dz, g).apply(w)
    assert np.abs((a - b) - lin).max() < 1e-12


def test_truncated_variant_differs_at_second_order():
    # below threshold the exact map is neutral, so any growth is truncation
    g = build_grid(8 * math.pi, 256)
    ratios = []
    for dz in (0.00075, 0.0015, 0.003):
        ex = floquet_increments(build_linear_map(SolitonSpec(), -1, 2, dz, g), g, n_modes=1)
        tr = floquet_increments(build_linear_map(SolitonSpec(), -1, 2, dz, g, variant="truncated"), g, n_modes=1)
        assert ex.top_increment < 1e-8
        a_max = 2 * dz  # gamma dz max|ubar|^2
        ratios.append((tr.top_increment - ex.top_increment) * dz / a_max**2)
    assert 0 < ratios[0] <= 3.0
    assert ratios[-1] == pytest.approx(ratios[0], rel=0.01)


def test_bad_requests():
    with pytest.raises(ValueError):
        build_linear_map(SolitonSpec(), -1, 2, 0.004, build_grid(10.0, 4096))
    with pytest.raises(ValueError):
        build_linear_map(SolitonSpec(), -1, 2, 0.004, SMALL, variant="rk")
    with pytest.raises(ValueError):
        build_linear_map([SolitonSpec(A=1), SolitonSpec(A=2, center=5)], -1, 2, 0.004, SMALL)


def test_cw_oracle_matches_closed_form_per_bin():
    g = build_grid(32 * math.pi, 1024)
    dz = 0.0043
    res = resonance_info(-1, dz, g)
    pr = cw_predict(CwSpec(1.0), -1, 2, g, res)
    fr = floquet_increments(build_linear_map(CwSpec(1.0), -1, 2, dz, g), g, n_modes=2 * g.N)
    inb = pr.in_band()
    assert inb.any()
    for w, rate in zip(pr.omega[inb], pr.rate[inb]):
        modes = np.isclose(fr.peaks, w)
        assert fr.increments[modes].max() == pytest.approx(rate, rel=0.02)
    assert fr.top_increment <= pr.lambda_max + 1e-9


def test_soliton_oracle_small_window():
    g = build_grid(32 * math.pi, 1024)
    for dz in (0.0030, 0.0048):
        res = resonance_info(-1, dz, g)
        fr = floquet_increments(build_linear_map(SolitonSpec(), -1, 2, dz, g), g)
        preds = predict_soliton_instability(SolitonSpec(), -1, 2, g.T, res)
        if not preds:
            assert fr.increments.max() <= 1e-3
            continue
        assert fr.top_increment == pytest.approx(preds[0].increment, rel=0.25)
        top = preds[0].peak_frequencies
        lo, hi = fr.sidebands[0]
        assert lo == pytest.approx(top["left+"], abs=2 * g.d_omega)
        assert hi == pytest.approx(top["right+"], abs=2 * g.d_omega)
        assert np.all(fr.resonant_fraction[fr.unstable()] >= 0.9)
        assert np.allclose(fr.mass.sum(axis=1), 1.0)


def test_band_report():
    g = build_grid(32 * math.pi, 512)
    runs = []
    for dz in (0.0160, 0.0190):
        fr = floquet_increments(build_linear_map(SolitonSpec(), -1, 2, dz, g), g)
        runs.append((dz, fr))
    rep = scan_unstable_bands(runs)
    assert rep.dz == [0.0160, 0.0190]
    for dz, c, inc, k, dist in rep.rows():
        assert inc > 1e-3 and dist <= 2.0
    below = floquet_increments(build_linear_map(SolitonSpec(), -1, 2, 0.02, build_grid(32 * math.pi, 256)), build_grid(32 * math.pi, 256))
    assert scan_unstable_bands([below]).empty
