import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from turingfold.absystem import (
    CanonicalAB,
    DegenerateABError,
    ScanDisagreementWarning,
    R_e,
    R_s,
    R_t,
    busse_map,
    classify,
    closed_form_class,
    critical_wavenumber,
    eckhaus_ratio,
    growth_curve,
    homogeneous_state,
    plane_wave,
    scan_classes,
    scan_growth,
    spectral_determinant,
    spectral_matrix,
    tangency_point,
)

pos = st.floats(0.1, 3.0)
wave_params = st.tuples(pos, pos, pos, st.floats(-1.3, 1.3), st.floats(-0.5, 3.0))


def plane_wave_residual(ab, wave):
    xi = np.linspace(0.0, 10.0, 33)
    A, B = wave.fields(xi)
    dA, dB = ab.rhs(A, B, -wave.K**2 * A, np.zeros_like(B))
    return max(np.max(np.abs(dA)), np.max(np.abs(dB)))


def test_turing_curve_anchor():
    assert float(R_t(math.sqrt(0.8), 1 / 3)) == pytest.approx(53 / 30, abs=1e-12)


@pytest.mark.parametrize("d", [0.2, 1 / 3, 0.5, 2.0])
def test_turing_curve_touches_sideband_curve(d):
    K, R = tangency_point(d)
    assert float(R_t(K, d)) == pytest.approx(R, abs=1e-12)
    assert float(R_s(K)) == pytest.approx(R, abs=1e-12)
    h = 1e-5
    slope_t = (R_t(K + h, d) - R_t(K - h, d)) / (2 * h)
    slope_s = (R_s(K + h) - R_s(K - h)) / (2 * h)
    assert slope_t == pytest.approx(slope_s, abs=1e-5)


def test_eckhaus_ratio_tends_to_ginzburg_landau_value():
    assert eckhaus_ratio(None, 1e-4) == pytest.approx(1 / math.sqrt(3), abs=1e-4)
    with pytest.raises(ValueError):
        eckhaus_ratio(None, 1.5)


@given(wave_params)
@settings(max_examples=60, deadline=None)
def test_plane_wave_solves_the_system(p):
    alpha, d, beta, K, R = p
    ab = CanonicalAB(alpha, d, beta, R)
    wave = plane_wave(ab, K)
    assume(wave is not None)
    assert plane_wave_residual(ab, wave) < 1e-12


@given(wave_params, st.floats(0.0, 4.0))
@settings(max_examples=60, deadline=None)
def test_determinant_closed_form_matches_numeric(p, k):
    alpha, d, beta, K, R = p
    ab = CanonicalAB(alpha, d, beta, R)
    wave = plane_wave(ab, K)
    assume(wave is not None)
    num = np.linalg.det(spectral_matrix(ab, wave, k))
    M = np.abs(spectral_matrix(ab, wave, k))
    scale = max(1.0, float(np.prod(M.max(axis=1))))
    assert abs(num - spectral_determinant(ab, wave, k)) < 1e-10 * scale


@given(wave_params)
@settings(max_examples=40, deadline=None)
def test_determinant_vanishes_at_zero_wavenumber(p):
    alpha, d, beta, K, R = p
    ab = CanonicalAB(alpha, d, beta, R)
    wave = plane_wave(ab, K)
    assume(wave is not None)
    assert spectral_determinant(ab, wave, 0.0) == 0.0
    assert abs(np.linalg.det(spectral_matrix(ab, wave, 0.0))) < 1e-12 * max(1.0, wave.A_bar**2 * beta)


@given(pos, pos, st.floats(-2.0, 1.0), st.floats(0.0, 4.0), st.sampled_from([1, -1]))
@settings(max_examples=60, deadline=None)
def test_homogeneous_spectra(alpha, d, R, k, sign):
    ab = CanonicalAB(alpha, d, 1.0, R)
    wave = homogeneous_state(ab, sign)
    ev = np.sort(np.linalg.eigvals(spectral_matrix(ab, wave, k)).real)
    s = math.sqrt(1 - R)
    want = np.sort([1 - sign * s - k * k] * 2 + [-sign * 2 * alpha * s - d * alpha * k * k])
    assert np.max(np.abs(ev - want)) < 1e-12


@given(wave_params, st.floats(0.01, 4.0))
@settings(max_examples=40, deadline=None)
def test_real_form_has_the_same_spectrum(p, k):
    alpha, d, beta, K, R = p
    ab = CanonicalAB(alpha, d, beta, R)
    wave = plane_wave(ab, K)
    assume(wave is not None)
    complex_growth = np.linalg.eigvals(spectral_matrix(ab, wave, k)).real.max()
    assert growth_curve(ab, wave, [k])[0] == pytest.approx(complex_growth, abs=1e-9 * max(1.0, abs(complex_growth)))


def test_zero_beta_is_rejected():
    ab = CanonicalAB(0.5, 0.5, 0.0, 1.0)
    with pytest.raises(DegenerateABError):
        plane_wave(ab, 0.2)
    with pytest.raises(DegenerateABError):
        closed_form_class(ab, 0.2)


def test_invalid_coefficients():
    with pytest.raises(ValueError):
        CanonicalAB(0.0, 0.5, 1.0)
    with pytest.raises(ValueError):
        CanonicalAB(0.5, -1.0, 1.0)


def test_plane_wave_existence_follows_existence_curve():
    ab = CanonicalAB(0.5, 0.5, 8.0)
    K = 0.6
    assert plane_wave(ab.with_R(float(R_e(K)) - 1e-3), K) is None
    assert plane_wave(ab.with_R(float(R_e(K)) + 1e-3), K) is not None
    # with beta < 0 the waves live on the other side
    neg = CanonicalAB(0.5, 0.5, -2.0)
    assert plane_wave(neg.with_R(float(R_e(K)) + 1e-3), K) is None


@pytest.mark.parametrize("K, R, cls", [
    (0.3, 0.0, "nonexistent"),
    (0.5, 0.6, "sideband_unstable"),
    (0.1, 0.5, "stable"),
    (0.9, 1.7, "turing_unstable"),
    (0.9, 3.5, "stable"),
    (1.1, 2.0, "ode_unstable"),
])
def test_closed_form_classes(K, R, cls):
    ab = CanonicalAB(2.0, 1 / 3, 1.0, R)
    assert closed_form_class(ab, K)[0] == cls


def test_negative_beta_waves_are_unstable():
    ab = CanonicalAB(1.0, 1.0, -1.0, 0.0)
    assert closed_form_class(ab, 0.2)[0] == "ode_unstable"
    growth, _ = scan_growth(ab, plane_wave(ab, 0.2))
    assert growth > 0


def test_turing_mode_at_critical_wavenumber():
    ab = CanonicalAB(2.0, 1 / 3, 1.0)
    K = math.sqrt(0.8)
    kc = critical_wavenumber(K, ab.d)
    Rt = float(R_t(K, ab.d))
    below = ab.with_R(Rt - 1e-3)
    growth, k = scan_growth(below, plane_wave(below, K), n=20000)
    assert growth > 0
    assert k == pytest.approx(kc, rel=2e-2)
    at = ab.with_R(Rt)
    assert growth_curve(at, plane_wave(at, K), [kc])[0] == pytest.approx(0.0, abs=1e-10)
    above = ab.with_R(Rt + 1e-3)
    assert scan_growth(above, plane_wave(above, K))[0] <= 1e-9


def test_sideband_boundary_from_the_scan():
    ab = CanonicalAB(1.0, 1.0, 1.0)
    K = 0.3
    Rs = float(R_s(K))
    assert scan_growth(ab.with_R(Rs - 1e-2), plane_wave(ab.with_R(Rs - 1e-2), K), n=20000)[0] > 0
    assert scan_growth(ab.with_R(Rs + 1e-2), plane_wave(ab.with_R(Rs + 1e-2), K))[0] <= 1e-9


def test_classify_reports_boundaries_and_growth():
    ab = CanonicalAB(2.0, 1 / 3, 1.0, 3.5)
    rep = classify(ab, 0.9)
    assert rep.cls == "stable"
    assert rep.scan_class == "stable"
    assert rep.boundaries["exists_turing"]
    assert rep.to_dict()["class"] == "stable"


def test_classify_warns_near_a_boundary():
    K = 0.4
    ab = CanonicalAB(1.0, 1.0, 1.0, float(R_s(K)) + 1e-8)
    with pytest.warns(UserWarning, match="boundary"):
        rep = classify(ab, K)
    assert rep.warning


def test_oscillatory_instability_is_flagged():
    # complex pair crossing that the closed forms do not see
    ab = CanonicalAB(0.5, 0.5, 8.0, 2.2)
    with pytest.warns(ScanDisagreementWarning):
        rep = classify(ab, 0.92)
    assert rep.cls == "stable"
    assert rep.scan_class == "unstable"
    assert rep.max_growth == pytest.approx(0.0934, abs=2e-3)


def test_busse_map_shape_and_rows():
    bm = busse_map(CanonicalAB(1.0, 1.0, 1.0), (-1.0, 1.0), (0.0, 2.0), (11, 7), scan=True)
    assert bm.classes.shape == (7, 11)
    rows = list(bm.rows())
    assert len(rows) == 77
    assert 0 < bm.stable_fraction() < 1
    exists = bm.classes != "nonexistent"
    assert np.all(np.isfinite(bm.max_growth[exists]))
    assert np.all(np.isnan(bm.max_growth[~exists]))


def test_scan_labels_agree_with_closed_forms_for_unit_coefficients():
    ab = CanonicalAB(1.0, 1.0, 1.0)
    Ks = np.linspace(-1.2, 1.2, 41)
    Rs = np.linspace(-0.5, 3.0, 37)
    labels = scan_classes(ab, Ks, Rs, n=300)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        closed = np.array([[closed_form_class(ab.with_R(float(R)), float(K))[0] for K in Ks] for R in Rs])
    coarse = np.where(closed == "stable", "stable", np.where(closed == "nonexistent", "nonexistent", "unstable"))
    assert np.mean(coarse != labels) < 0.02
