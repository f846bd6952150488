import math

import numpy as np
import pytest

from turingfold import experiments as ex
from turingfold.absystem import CanonicalAB, plane_wave
from turingfold.bifurcation import locate_turing_fold
from turingfold.fieldsolver import ABState, Grid1D
from turingfold.models import ScalarSixthOrder


def test_pair_exponents_recover_a_power_law():
    deltas = [0.08, 0.02, 0.04, 0.06]
    norms = [3.0 * d**1.7 for d in deltas]
    assert ex.pair_exponents(deltas, norms) == pytest.approx([1.7] * 4)


def test_pair_exponents_use_the_smaller_neighbour():
    deltas = [0.02, 0.04, 0.06]
    norms = [0.02**2, 0.04**2, 0.05**2]
    e = ex.pair_exponents(deltas, norms)
    assert e[0] == pytest.approx(2.0)
    assert e[1] == pytest.approx(2.0)
    assert e[2] == pytest.approx(math.log(0.05**2 / 0.04**2) / math.log(0.06 / 0.04))
    assert math.isnan(ex.pair_exponents([0.1], [0.01])[0])


def test_convergence_domain_and_model():
    assert ex.convergence_domain(0.04, 0.0) == pytest.approx(6 * math.pi)
    assert ex.convergence_domain(0.04, 0.5) == pytest.approx(6 * math.pi / 1.1)
    m = ex.convergence_model(0.1, 4.0, 2.0)
    assert m.mu == pytest.approx(-1 + 0.0025 - 0.04)
    assert m.nu == pytest.approx(0.9)


def test_single_convergence_row():
    # frozen from the full ten-row run
    row, = ex.run_convergence(0.0, deltas=[0.1])
    assert row.outcome == "periodic"
    assert row.converged
    assert row.norm_diff == pytest.approx(0.0441612, rel=1e-4)


def test_classify_tipping():
    evaded = [(-0.9, 1.2), (-1.1, 1.1), (-1.2, 1.0)]
    assert ex.classify_tipping(evaded) == ("evaded", None)
    collapsed = [(-0.9, 1.2), (-0.99, 1e-4), (-1.1, 1e-5)]
    assert ex.classify_tipping(collapsed) == ("collapsed", -0.99)
    assert ex.classify_tipping([(-0.9, 1.2), (-1.1, 0.1)])[0] == "transitioned"


def test_ode_tipping_collapses_at_the_fold():
    trace = ex.run_tipping(mode="ode")
    assert trace.outcome == "collapsed"
    assert trace.collapse_mu == pytest.approx(-1.0, abs=0.02)
    assert trace.manifest["eps"] == pytest.approx(0.36 / 4000)


def _grid_and_wave(K_index=5, N=64):
    grid = Grid1D(40 * math.pi, N)
    return grid, 2 * math.pi * K_index / grid.L


def test_dominant_wavenumber_is_signed():
    grid, K = _grid_and_wave()
    assert ex.dominant_wavenumber(np.exp(1j * K * grid.x), grid) == pytest.approx(K)
    assert ex.dominant_wavenumber(np.exp(-1j * K * grid.x), grid) == pytest.approx(-K)


def test_tag_regime_on_synthetic_traces():
    grid, K = _grid_and_wave()
    wave = ABState(0.5 * np.exp(1j * K * grid.x), np.full(grid.N, 0.3))
    t = np.arange(1000.0)
    flat = np.full(1000, 0.4)
    assert ex.tag_regime(t, flat, wave, grid, K)[0] == "unchanged"
    assert ex.tag_regime(t, flat, wave, grid, K + 3 * 2 * math.pi / grid.L)[0] == "reselected"
    modulated = ABState(wave.A * (1 + 0.3 * np.cos(2 * math.pi * grid.x / grid.L)), wave.B)
    assert ex.tag_regime(t, flat, modulated, grid, K)[0] == "stationary_quasiperiodic"
    periodic = 0.4 + 0.01 * np.sin(2 * math.pi * t / 20)
    tag, conf, var, frac = ex.tag_regime(t, periodic, modulated, grid, K)
    assert tag == "time_periodic"
    assert frac > 0.9
    noisy = 0.4 + 0.01 * np.random.default_rng(0).standard_normal(1000)
    assert ex.tag_regime(t, noisy, modulated, grid, K)[0] == "irregular"


def test_reselection_ends_on_a_stable_wave():
    K0 = 0.6
    res = ex.run_reselection(CanonicalAB(0.5, 0.5, 8.0), K0, 1.0, Grid1D(60 * math.pi / K0, 256), 2000.0)
    assert res.plane_wave_end
    assert res.in_stable_region
    assert abs(res.K_end) < K0


def test_reselection_rejects_stable_start():
    with pytest.raises(ValueError):
        ex.run_reselection(CanonicalAB(1.0, 1.0, 1.0), 0.1, 0.5, Grid1D(20.0, 32), 1.0)
    with pytest.raises(ValueError):
        ex.run_reselection(CanonicalAB(1.0, 1.0, -1.0), 0.1, 0.0, Grid1D(20.0, 32), 1.0)


def test_regime_scan_returns_a_tag_per_alpha():
    K0 = math.sqrt(0.8)
    grid = ex.regime_grid(K0, N=64, wavelengths=4)
    out = ex.run_regime_scan(alphas=[0.8, 0.7], grid=grid, t_max=20.0, keep_state=True)
    assert [r.alpha for r in out] == [0.8, 0.7]
    for r in out:
        assert r.tag in ex.REGIME_TAGS
        assert len(r.norms) == 20
        assert r.state is not None


def test_gl_embedding_of_the_example():
    m = ScalarSixthOrder(eta=2.0)
    rep = locate_turing_fold(m, 0.9, -1.0, k_seed=1.0)
    res = ex.run_gl_embedding(rep, m, 0.01, 0.05)
    assert res.deviation == pytest.approx(0.0056, abs=2e-4)
    assert res.deviation <= 0.1
    assert res.landau == pytest.approx(-409.59, rel=1e-3)
    assert res.omega_mu == pytest.approx(-202.50, rel=1e-3)
    with pytest.raises(ValueError):
        ex.run_gl_embedding(rep, m, 0.01, -0.1)


def test_gl_embedding_needs_positive_beta():
    m = ScalarSixthOrder(eta=-1.0)
    rep = locate_turing_fold(m, 0.9, -1.0, k_seed=1.0)
    with pytest.raises(ValueError, match="beta"):
        ex.run_gl_embedding(rep, m, 0.01, 0.05)


def test_small_chaos_pair_tracks_initially():
    pair = ex.run_underlying_chaos(delta=0.05, wavelengths=4, N_ab=64, tau_max=5.0, record_every=1.0)
    assert not pair.blew_up
    assert len(pair.times) == 5
    assert pair.ab.d == pytest.approx((2 + pair.gamma) / 4)
    first = np.max(np.abs(pair.U[0] - pair.U_ab[0]))
    assert first < 0.5 * np.max(np.abs(pair.U_ab[0] - 1))
    m = pair.metrics()[0]
    assert m["k"] == pytest.approx(m["k_ab"])


def test_initial_wave_must_exist():
    ab = CanonicalAB(1.0, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        ex._ab_initial(ab, 0.5, Grid1D(20.0, 32), 0.0, 0)
    wave = plane_wave(ab.with_R(0.5), 0.2)
    st = ex._ab_initial(ab.with_R(0.5), 0.2, Grid1D(20.0, 32), 0.0, 0)
    assert np.allclose(np.abs(st.A), wave.A_bar)


def test_compare_snapshots_aligns_phase():
    x = np.linspace(0, 8 * math.pi, 256, endpoint=False)
    U = 1 + 0.1 * np.cos(x)
    V = 1 + 0.1 * np.cos(x - 1.0)
    m = ex.compare_snapshots(x, U, V)
    assert m["amp"] == pytest.approx(m["amp_ab"], rel=1e-3)
    assert m["k"] == pytest.approx(1.0)
    assert m["k_ab"] == pytest.approx(1.0)
    assert m["rms"] > 0.05
    assert m["rms_aligned"] < 0.01


def test_regime_scan_tags_blow_up(monkeypatch):
    from turingfold.fieldsolver import BlowUpError

    def boom(*args, **kwargs):
        raise BlowUpError(412.0, 1e7)

    monkeypatch.setattr(ex, "integrate_ab", boom)
    grid = ex.regime_grid(math.sqrt(0.8), N=64, wavelengths=4)
    r, = ex.run_regime_scan(alphas=[0.755], grid=grid, t_max=1.0)
    assert r.tag == "blow_up" and r.tag in ex.REGIME_TAGS
    assert r.norms == []
