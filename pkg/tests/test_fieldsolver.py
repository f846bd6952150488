import math

import numpy as np
import pytest

from helpers import etdrk4_errors, observed_orders
from turingfold.absystem import CanonicalAB, plane_wave
from turingfold.fieldsolver import (
    ABState,
    BlowUpError,
    Grid1D,
    RawAB,
    ScalarState,
    integrate_ab,
    integrate_ode,
    integrate_rd,
    integrate_scalar,
    plane_wave_U_AB,
    ramp_parameter,
    reconstruct_U_AB,
    step_ab,
    step_scalar,
)
from turingfold.models import ScalarSixthOrder, turing_fold_3


def test_etdrk4_is_fourth_order():
    hs = [0.1, 0.05, 0.025]
    assert min(observed_orders(hs, etdrk4_errors(hs))) >= 3.7


def test_ab_solver_is_fourth_order_in_time():
    ab = CanonicalAB(0.8, 1 / 3, 1.0, 0.5)
    grid = Grid1D(2 * math.pi / 0.5, 32)
    x = grid.x
    A0 = 0.3 * np.exp(1j * 0.5 * x) + 0.05 * np.cos(1.0 * x)
    B0 = 0.6 + 0.1 * np.sin(0.5 * x)

    def final(dt):
        return integrate_ab(ab, ABState(A0, B0), grid, dt, 2.0).state

    ref = final(0.2 / 64)
    hs = [0.2, 0.1, 0.05]
    errs = []
    for dt in hs:
        s = final(dt)
        errs.append(max(np.max(np.abs(s.A - ref.A)), np.max(np.abs(s.B - ref.B))))
    assert min(observed_orders(hs, errs)) >= 3.7


def test_stable_plane_wave_is_preserved():
    ab = CanonicalAB(1.0, 1.0, 1.0, 0.5)
    grid = Grid1D(20 * math.pi, 64)
    K = 2 * math.pi * 2 / grid.L
    wave = plane_wave(ab, K)
    A, B = wave.fields(grid.x)
    res = integrate_ab(ab, ABState(A, B), grid, 0.05, 20.0)
    assert np.max(np.abs(res.state.A - A)) < 1e-10
    assert np.max(np.abs(res.state.B - B)) < 1e-10


def test_stable_homogeneous_state_attracts():
    ab = CanonicalAB(0.5, 0.5, 8.0, -0.5)
    grid = Grid1D(20.0, 32)
    rng = np.random.default_rng(1)
    B0 = math.sqrt(1.5) + 1e-3 * rng.standard_normal(32)
    A0 = 1e-3 * (rng.standard_normal(32) + 1j * rng.standard_normal(32))
    res = integrate_ab(ab, ABState(A0, B0), grid, 0.05, 200.0, steady_tol=1e-12)
    assert res.converged
    assert np.max(np.abs(res.state.A)) < 1e-10
    assert np.allclose(res.state.B, math.sqrt(1.5), atol=1e-10)


def test_mode_decays_at_the_homogeneous_rate():
    alpha, d, R = 0.7, 0.4, 0.2
    ab = CanonicalAB(alpha, d, 1.0, R)
    grid = Grid1D(2 * math.pi, 32)
    Bs = math.sqrt(1 - R)
    eps, k, t = 1e-8, 2.0, 1.0
    B0 = Bs + eps * np.cos(k * grid.x)
    res = integrate_ab(ab, ABState(np.zeros(32, complex), B0), grid, 0.01, t)
    amp = 2 * np.fft.rfft(res.state.B - Bs)[2].real / 32
    assert amp / eps == pytest.approx(math.exp((-2 * alpha * Bs - d * alpha * k * k) * t), rel=1e-6)


def test_neumann_matches_even_periodic_extension():
    ab = CanonicalAB(0.8, 0.5, 2.0, 0.3)
    L, N = 10.0, 32
    neu = Grid1D(L, N, "neumann")
    per = Grid1D(2 * L, 2 * N)

    def init(x):
        c = np.cos(np.pi * x / L)
        return 0.2 + 0.1 * c + 0.05j * np.cos(3 * np.pi * x / L), 0.8 + 0.1 * c**2

    h = L / N
    A_n, B_n = init(neu.x)
    A_p, B_p = init(per.x + h / 2)
    rn = integrate_ab(ab, ABState(A_n, B_n), neu, 0.05, 5.0).state
    rp = integrate_ab(ab, ABState(A_p, B_p), per, 0.05, 5.0).state
    assert np.max(np.abs(rn.A - rp.A[:N])) < 1e-10
    assert np.max(np.abs(rn.B - rp.B[:N])) < 1e-10


def test_blow_up_is_detected():
    ab = CanonicalAB(1.0, 1.0, 1.0, 0.0)
    grid = Grid1D(10.0, 16)
    state = ABState(np.zeros(16, complex), np.full(16, -3.0))
    with pytest.raises(BlowUpError):
        integrate_ab(ab, state, grid, 0.01, 5.0)
    res = integrate_ab(ab, state, grid, 0.01, 5.0, raise_blowup=False)
    assert res.blew_up
    assert "blow-up" in res.message


def test_raw_and_canonical_forms_agree():
    ab = CanonicalAB(0.6, 0.7, 3.0, 0.4)
    grid = Grid1D(30.0, 32)
    rng = np.random.default_rng(2)
    s = ABState(0.3 + 0.01 * rng.standard_normal(32) + 0j, 0.7 + 0.01 * rng.standard_normal(32))
    a = step_ab(ab, s, 0.1, grid)
    b = step_ab(RawAB.from_canonical(ab), s, 0.1, grid)
    assert np.max(np.abs(a.A - b.A)) < 1e-14
    raw = RawAB.from_dict({f"c{i}": v for i, v in enumerate(
        (1.0, 1.0, -1.0, 0.6 * 0.7, 0.6, 0.6, -0.6, 0.6 * 3.0), 1)}, r=0.4)
    c = step_ab(raw, s, 0.1, grid)
    assert np.max(np.abs(a.B - c.B)) < 1e-14
    with pytest.raises(TypeError):
        step_ab("not a system", s, 0.1, grid)


def test_step_matches_integrate():
    ab = CanonicalAB(0.6, 0.7, 3.0, 0.4)
    grid = Grid1D(30.0, 32)
    s = ABState(0.3 + 0.05 * np.cos(grid.x * 2 * math.pi / 30) + 0j, np.full(32, 0.7))
    one = step_ab(ab, s, 0.1, grid)
    many = integrate_ab(ab, s, grid, 0.1, 0.1).state
    assert np.allclose(one.A, many.A, atol=1e-15)
    assert one.tau == pytest.approx(0.1)


def test_scalar_homogeneous_state_above_turing_point_is_stationary():
    m = ScalarSixthOrder(mu=-0.5, nu=0.9, eta=2.0)
    u_plus = 1 + math.sqrt(0.5)
    grid = Grid1D(8 * math.pi, 64)
    rng = np.random.default_rng(0)
    res = integrate_scalar(m, ScalarState(u_plus + 1e-4 * rng.standard_normal(64)), grid, 0.05, 200.0)
    assert np.max(np.abs(res.state.U - u_plus)) < 1e-8
    st = step_scalar(m, ScalarState(np.full(64, u_plus)), 0.05, grid)
    assert np.max(np.abs(st.U - u_plus)) < 1e-12


def test_scalar_records_mu_and_norm():
    m = ScalarSixthOrder(mu=-0.5, nu=0.9)
    grid = Grid1D(4 * math.pi, 32)
    ramp = ramp_parameter("mu", -0.5, -0.01)
    res = integrate_scalar(m, ScalarState(np.full(32, 1.5)), grid, 0.05, 2.0, ramp=ramp, record_every=1.0,
                           keep_snapshots=False)
    assert res.snapshots == []
    assert [mu for mu, _ in res.diagnostics] == pytest.approx([-0.51, -0.52])
    with pytest.raises(ValueError):
        integrate_scalar(m, ScalarState(np.ones(32)), grid, 0.05, 1.0, ramp=ramp_parameter("nu", 0, 1))


def test_rd_solver_keeps_zero_state():
    m = turing_fold_3(mu=0.0, nu=-0.5)
    grid = Grid1D(20.0, 32)
    res = integrate_rd(m, np.zeros((3, 32)), grid, 0.01, 1.0)
    assert np.max(np.abs(res.state)) < 1e-14


def test_ode_collapses_past_the_fold():
    m = ScalarSixthOrder(mu=-0.874, nu=0.4)
    eps = 0.36 / 4000
    t, u, mus = integrate_ode(m, 1 + math.sqrt(1 - 0.874), 2000.0, ramp=ramp_parameter("mu", -0.874, -eps),
                              collapse_level=0.5)
    assert mus[-1] < -1
    assert mus[-1] == pytest.approx(-1.0, abs=0.02)


def test_reconstruction_needs_commensurate_carrier():
    grid = Grid1D(10.0, 32)
    with pytest.raises(ValueError, match="incommensurate"):
        reconstruct_U_AB(0.1, 0.0, 0.1, 1.0, grid)
    grid = Grid1D(4 * math.pi, 64)
    U = reconstruct_U_AB(0.25, 0.5, 0.1, 1.0, grid)
    assert np.allclose(U, 1 + 0.1 * (0.5 + 0.5 * np.cos(grid.x)))


def test_plane_wave_reconstruction_of_example():
    x = np.linspace(0, 10, 11)
    delta, r, eta = 0.04, 4.0, 2.0
    U = plane_wave_U_AB(x, delta, 0.0, r, eta)
    amp = math.sqrt((0.25 + r - 0.25) / 2)
    assert np.allclose(U, 1 + delta / 2 + 2 * delta * amp * np.cos(x))
    with pytest.raises(ValueError):
        plane_wave_U_AB(x, delta, 0.0, -1.0, 2.0)


def test_raw_system_matches_canonical_through_scale_maps():
    from turingfold.bifurcation import ABCoefficients

    raw = dict(c1=4.0, c2=1.0, c3=-2.0, c4=1.0, c5=0.25, c6=1.0, c7=-1.0, c8=2.0)
    r = 0.1
    co = ABCoefficients.from_raw(raw)
    sm = co.scale_maps
    ab = co.to_canonical_ab(R=sm["R"] * r)
    N, L_raw = 32, 40.0
    g_raw = Grid1D(L_raw, N)
    g_can = Grid1D(sm["xi"] * L_raw, N)
    rng = np.random.default_rng(5)
    A0 = 0.2 + 0.02 * rng.standard_normal(N) + 0.02j * rng.standard_normal(N)
    B0 = 0.4 + 0.02 * rng.standard_normal(N)
    dt = 0.01
    raw_end = integrate_ab(RawAB.from_dict(raw, r), ABState(A0, B0), g_raw, dt, 10.0 / sm["tau"]).state
    can_end = integrate_ab(ab, ABState(A0 / sm["A"], B0 / sm["B"]), g_can, dt * sm["tau"], 10.0).state
    assert np.max(np.abs(raw_end.A - sm["A"] * can_end.A)) < 1e-8
    assert np.max(np.abs(raw_end.B - sm["B"] * can_end.B)) < 1e-8


def test_neumann_mean_of_B_has_no_boundary_flux():
    ab = CanonicalAB(0.8, 0.5, 2.0, 0.3)
    grid = Grid1D(10.0, 64, "neumann")
    x = grid.x
    A0 = 0.3 + 0.1 * np.cos(np.pi * x / 10) + 0j
    B0 = 0.7 + 0.1 * np.cos(2 * np.pi * x / 10)
    res = integrate_ab(ab, ABState(A0, B0), grid, 0.001, 1.0, record_every=0.001)
    means = np.array([np.mean(s.B) for s in res.snapshots])
    rhs = np.array([ab.alpha * np.mean(1 - ab.R - s.B**2 + ab.beta * np.abs(s.A) ** 2) for s in res.snapshots])
    change = means[-1] - means[0]
    integral = np.sum(0.5 * (rhs[1:] + rhs[:-1])) * 0.001
    assert change == pytest.approx(integral, abs=1e-6)
