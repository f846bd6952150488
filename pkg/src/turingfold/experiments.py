"""Experiment drivers: convergence study, tipping runs, AB-system regimes and comparisons."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .absystem import CanonicalAB, R_t, classify, plane_wave
from .bifurcation import (
    TuringFoldReport,
    ab_coefficients,
    extended_model_from_canonical,
    extended_model_parameters,
    find_turing,
    landau_full,
    turing_seed_from_report,
)
from .fieldsolver import (
    ABState,
    BlowUpError,
    Grid1D,
    Ramp,
    ScalarState,
    integrate_ab,
    integrate_ode,
    integrate_scalar,
    plane_wave_U_AB,
    reconstruct_U_AB,
)
from .models import ScalarSixthOrder, dispersion_derivatives

# ---------------------------------------------------------------------------
# convergence of the plane-wave approximation


@dataclass
class ConvergenceRow:
    delta: float
    norm_diff: float
    exponent: float = float("nan")
    converged: bool = True
    t_end: float = 0.0
    outcome: str = "periodic"


def convergence_domain(delta: float, K: float, periods: int = 3) -> float:
    """Domain holding ``periods`` wavelengths of the carrier ``1 + sqrt(delta) K``."""
    return periods * 2 * math.pi / (1 + math.sqrt(delta) * K)


def convergence_model(delta: float, r: float, eta: float) -> ScalarSixthOrder:
    return ScalarSixthOrder(mu=-1 + delta**2 / 4 - r * delta**2, nu=1 - delta, eta=eta)


def pair_exponents(deltas, norms) -> list[float]:
    """Exponent of each row from the row itself and the next smaller delta.

    The smallest delta has no smaller neighbour and reuses the pair above it.
    """
    d = np.asarray(deltas, dtype=float)
    n = np.asarray(norms, dtype=float)
    order = np.argsort(d)
    d, n = d[order], n[order]
    out = np.full(len(d), np.nan)
    for i in range(len(d)):
        j, k = (i - 1, i) if i > 0 else (0, 1)
        if k >= len(d):
            continue
        if j < 0 or n[j] <= 0 or n[k] <= 0:
            continue
        out[i] = (math.log(n[j]) - math.log(n[k])) / (math.log(d[j]) - math.log(d[k]))
    res = np.empty_like(out)
    res[order] = out
    return [float(v) for v in res]


def run_convergence(K: float, r: float = 4.0, eta: float = 2.0, deltas=(0.02, 0.04, 0.06, 0.08, 0.1),
                    N: int = 64, periods: int = 3, dt: float = 0.05, t_max: float = 10000.0,
                    steady_tol: float = 1e-9) -> list[ConvergenceRow]:
    """Distance between the settled pattern and its plane-wave approximation for each delta."""
    rows = []
    for delta in deltas:
        grid = Grid1D(convergence_domain(delta, K, periods), N)
        model = convergence_model(delta, r, eta)
        U_ab = plane_wave_U_AB(grid.x, delta, K, r, eta)
        res = integrate_scalar(model, ScalarState(U_ab.copy()), grid, dt, t_max, steady_tol=steady_tol,
                               raise_blowup=False)
        U = res.state.U
        outcome = "periodic"
        if res.blew_up:
            outcome = "blow_up"
        elif grid.l2_norm(U) < 1e-3:
            outcome = "collapsed"
        rows.append(ConvergenceRow(float(delta), grid.l2_norm(U - U_ab), converged=res.converged,
                                   t_end=res.steps * dt, outcome=outcome))
    ok = [row for row in rows if row.outcome == "periodic"]
    for row, e in zip(ok, pair_exponents([row.delta for row in ok], [row.norm_diff for row in ok])):
        row.exponent = e
    return rows


# ---------------------------------------------------------------------------
# tipping


@dataclass
class TippingTrace:
    samples: list
    outcome: str
    collapse_mu: float | None = None
    mode: str = "pde"
    manifest: dict = field(default_factory=dict)


def classify_tipping(samples, mu_star: float = -1.0, u_star: float = 1.0) -> tuple[str, float | None]:
    """``evaded`` / ``collapsed`` / ``transitioned`` from ``(mu, norm)`` samples."""
    collapse = next((mu for mu, nrm in samples if nrm < 1e-3), None)
    if collapse is not None:
        return "collapsed", collapse
    after = [nrm for mu, nrm in samples if mu < mu_star]
    if after and min(after) > 0.25 * u_star:
        return "evaded", None
    return "transitioned", None


def run_tipping(eta: float = 2.0, delta: float = 0.6, gamma: float = 0.0, mu0: float = -0.874,
                eps: float | None = None, T: float = 2000.0, L: float = 4 * math.pi, N: int = 64,
                dt: float = 0.05, noise: float = 1e-3, seed: int = 0, mode: str = "pde",
                record_every: float = 1.0) -> TippingTrace:
    """Slowly decrease ``mu`` through the Turing and fold points of the sixth-order example."""
    eps = delta**2 / 4000 if eps is None else eps
    ramp = Ramp("mu", mu0, -eps)
    model = ScalarSixthOrder(mu=mu0, nu=1 - delta, eta=eta, gamma=gamma)
    u_plus = 1 + math.sqrt(1 + mu0)
    cfg = {"eta": eta, "delta": delta, "gamma": gamma, "mu0": mu0, "eps": eps, "T": T, "L": L, "N": N,
           "dt": dt, "noise": noise, "seed": seed, "mode": mode}
    if mode == "ode":
        t, u, mus = integrate_ode(model, u_plus, T, ramp=ramp, record_every=record_every)
        samples = [(float(m), abs(float(x))) for m, x in zip(mus, u)]
    else:
        grid = Grid1D(L, N)
        rng = np.random.default_rng(seed)
        # band-limited noise: random phases on the lowest third of the spectrum
        coeff = np.zeros(N // 2 + 1, dtype=complex)
        nb = N // 6
        coeff[1:nb] = rng.standard_normal(nb - 1) + 1j * rng.standard_normal(nb - 1)
        pert = np.fft.irfft(coeff, n=N)
        pert *= noise / max(np.max(np.abs(pert)), 1e-300)
        res = integrate_scalar(model, ScalarState(u_plus + pert), grid, dt, T, ramp=ramp, u_ref=1.0,
                               record_every=record_every, raise_blowup=False, keep_snapshots=False)
        samples = [(float(m), float(nrm)) for m, nrm in res.diagnostics]
        if res.blew_up:
            return TippingTrace(samples, "blow_up", None, mode, cfg)
    outcome, collapse_mu = classify_tipping(samples)
    return TippingTrace(samples, outcome, collapse_mu, mode, cfg)


# ---------------------------------------------------------------------------
# AB-system dynamics


def _ab_initial(ab: CanonicalAB, K0: float, grid: Grid1D, noise: float, seed: int) -> ABState:
    wave = plane_wave(ab, K0)
    if wave is None:
        raise ValueError(f"no plane wave with K = {K0} at R = {ab.R}")
    A, B = wave.fields(grid.x)
    rng = np.random.default_rng(seed)
    A = A + noise * (rng.standard_normal(grid.N) + 1j * rng.standard_normal(grid.N))
    B = B + noise * rng.standard_normal(grid.N)
    return ABState(A, B)


def dominant_wavenumber(A: np.ndarray, grid: Grid1D) -> float:
    """Signed wavenumber of the strongest Fourier mode of a complex field."""
    spec = np.abs(np.fft.fft(A)) ** 2
    k = 2 * np.pi * np.fft.fftfreq(grid.N, d=grid.h)
    return float(k[int(np.argmax(spec))])


def _is_plane_wave(state: ABState, tol: float = 1e-2) -> bool:
    amp = np.abs(state.A)
    scale = max(float(np.mean(amp)), 1e-12)
    return float(np.std(amp)) / scale < tol and float(np.std(state.B)) < tol * max(1.0, abs(float(np.mean(state.B))))


@dataclass
class ReselectionResult:
    K0: float
    K_end: float
    end_class: str
    in_stable_region: bool
    converged: bool
    plane_wave_end: bool
    state: ABState
    times: list
    norms: list


def _norm_trace(state: ABState):
    return float(np.sqrt(np.mean(np.abs(state.A) ** 2)))


def run_reselection(ab: CanonicalAB, K0: float, R: float | None, grid: Grid1D, t_max: float, dt: float = 0.05,
                    noise: float = 1e-6, seed: int = 0, steady_tol: float = 1e-9) -> ReselectionResult:
    """Evolve from a perturbed unstable plane wave and identify the selected wave.

    ``R=None`` keeps ``ab.R``.
    """
    ab = ab if R is None else ab.with_R(R)
    if ab.beta <= 0:
        raise ValueError("reselection needs beta > 0")
    start = classify(ab, K0, scan=False).cls
    if start in ("stable", "nonexistent"):
        raise ValueError(f"initial plane wave must exist and be unstable, got {start!r}")
    res = integrate_ab(ab, _ab_initial(ab, K0, grid, noise, seed), grid, dt, t_max, record_every=1.0,
                       steady_tol=steady_tol, diagnostic=_norm_trace, keep_snapshots=False, raise_blowup=False)
    end = res.state
    K_end = dominant_wavenumber(end.A, grid)
    pw = _is_plane_wave(end)
    end_class = classify(ab, K_end, scan=False).cls if pw else "not_a_plane_wave"
    return ReselectionResult(K0, K_end, end_class, end_class == "stable", res.converged, pw, end,
                             res.times, res.diagnostics)


REGIME_TAGS = ("stationary_quasiperiodic", "time_periodic", "irregular", "reselected", "unchanged", "blow_up")


@dataclass
class RegimeResult:
    alpha: float
    tag: str
    confidence: float
    tail_variance: float
    periodic_fraction: float
    K_end: float
    times: list
    norms: list
    state: ABState | None = None


def tag_regime(times, norms, state: ABState, grid: Grid1D, K0: float, window: float = 0.2,
               var_tol: float = 1e-10, periodic_fraction: float = 0.9) -> tuple[str, float, float, float]:
    """Regime tag from the trailing window of the ``||A||`` trace and the final field.

    Returns ``(tag, confidence, tail variance, dominant-frequency power fraction)``.
    """
    norms = np.asarray(norms, dtype=float)
    n = len(norms)
    tail = norms[int((1 - window) * n):]
    var = float(np.var(tail))
    K_end = dominant_wavenumber(state.A, grid)
    if _is_plane_wave(state):
        dk = 2 * np.pi / grid.L
        tag = "unchanged" if abs(abs(K_end) - abs(K0)) < 0.5 * dk else "reselected"
        return tag, 1.0, var, float("nan")
    if var < var_tol:
        return "stationary_quasiperiodic", 1.0 - var / var_tol, var, float("nan")
    spec = np.abs(np.fft.rfft(tail - tail.mean())) ** 2
    spec[0] = 0.0
    i = int(np.argmax(spec))
    band = spec[max(i - 1, 1):i + 2].sum()
    frac = float(band / spec.sum()) if spec.sum() > 0 else 0.0
    if frac > periodic_fraction:
        return "time_periodic", frac, var, frac
    return "irregular", 1.0 - frac, var, frac


def regime_grid(K0: float, N: int = 2048, bc: str = "periodic", wavelengths: int = 100) -> Grid1D:
    """Periodic domain of ``wavelengths`` carrier periods (``200 pi / K0`` for 100)."""
    return Grid1D(wavelengths * 2 * math.pi / K0, N, bc)


def run_regime_scan(d: float = 1 / 3, beta: float = 1.0, K0: float = math.sqrt(0.8), R_offset: float = -0.01,
                    alphas=(0.8, 0.7745, 0.75715, 0.7), grid: Grid1D | None = None, t_max: float = 5000.0,
                    dt: float = 0.05, noise: float = 1e-6, seed: int = 0, keep_state: bool = False
                    ) -> list[RegimeResult]:
    """Tag the long-time behaviour near a marginally Turing-unstable plane wave for each alpha."""
    grid = regime_grid(K0) if grid is None else grid
    R = float(R_t(K0, d)) + R_offset
    out = []
    for alpha in alphas:
        ab = CanonicalAB(alpha, d, beta, R)
        try:
            res = integrate_ab(ab, _ab_initial(ab, K0, grid, noise, seed), grid, dt, t_max, record_every=1.0,
                               diagnostic=_norm_trace, keep_snapshots=False)
        except BlowUpError:
            out.append(RegimeResult(alpha, "blow_up", 1.0, float("nan"), float("nan"), float("nan"), [], []))
            continue
        tag, conf, var, frac = tag_regime(res.times, res.diagnostics, res.state, grid, K0)
        out.append(RegimeResult(alpha, tag, conf, var, frac, dominant_wavenumber(res.state.A, grid), res.times,
                                res.diagnostics, res.state if keep_state else None))
    return out


# ---------------------------------------------------------------------------
# Ginzburg-Landau embedding


@dataclass
class GLEmbedding:
    delta: float
    R: float
    r: float
    amp_ab: float
    amp_gl: float
    deviation: float
    landau: float
    omega_mu: float


def run_gl_embedding(report: TuringFoldReport, model, delta: float, R_small: float) -> GLEmbedding:
    """Stokes-wave amplitude of the AB-system against the Ginzburg-Landau fixed point.

    Both are expressed as the physical amplitude of the critical Fourier mode
    at ``mu = mu_t(nu* - delta) - r delta^2``.
    """
    coeffs = ab_coefficients(report, model)
    if coeffs.beta <= 0:
        raise ValueError("the Ginzburg-Landau embedding needs a supercritical (beta > 0) AB-system")
    if not R_small > 0:
        raise ValueError("R_small must be positive")
    maps = coeffs.scale_maps
    r = R_small / maps["R"]
    amp_ab = delta * maps["A"] * math.sqrt(R_small / coeffs.beta)
    tp = find_turing(model, report.nu_star - delta, turing_seed_from_report(report, delta))
    L = landau_full(model, tp)
    om = dispersion_derivatives(model, tp.u_t if len(tp.u_t) > 1 else tp.u_t[0], tp.k_c, tp.mu_t, tp.nu)
    w_mu = om["omega_mu"]
    amp2 = w_mu * r * delta**2 / L
    amp_gl = math.sqrt(amp2) if amp2 > 0 else float("nan")
    return GLEmbedding(delta, R_small, r, amp_ab, amp_gl, abs(amp_gl / amp_ab - 1), L, w_mu)


# ---------------------------------------------------------------------------
# extended model against its AB-system


@dataclass
class ChaosPair:
    gamma: float
    eta: float
    delta: float
    ab: CanonicalAB
    x: np.ndarray
    times: list
    U: list
    U_ab: list
    blew_up: bool = False
    message: str = ""

    def metrics(self) -> list[dict]:
        return [compare_snapshots(self.x, U, V) for U, V in zip(self.U, self.U_ab)]


def compare_snapshots(x, U, U_ab) -> dict:
    """Amplitude, dominant wavenumber and phase-aligned distance of two periodic snapshots.

    The phase offset is the circular shift maximising the cross-correlation
    of the mean-free fields.
    """
    U = np.asarray(U, dtype=float)
    V = np.asarray(U_ab, dtype=float)
    n = len(U)
    h = float(x[1] - x[0])
    u, v = U - U.mean(), V - V.mean()
    fu, fv = np.fft.rfft(u), np.fft.rfft(v)
    k = 2 * np.pi * np.fft.rfftfreq(n, d=h)
    corr = np.fft.irfft(fu * np.conj(fv), n=n)
    shift = int(np.argmax(corr))
    aligned = np.roll(V, shift)
    return {"amp": float(np.max(np.abs(u))), "amp_ab": float(np.max(np.abs(v))),
            "k": float(k[int(np.argmax(np.abs(fu)))]), "k_ab": float(k[int(np.argmax(np.abs(fv)))]),
            "shift": shift * h, "rms": float(np.sqrt(np.mean((U - V) ** 2))),
            "rms_aligned": float(np.sqrt(np.mean((U - aligned) ** 2)))}


def run_underlying_chaos(alpha: float = 0.76, beta: float = 2.0, delta: float = 5e-4, K: float = math.sqrt(0.8),
                         R_offset: float = -0.01, wavelengths: int = 100, N_ab: int = 2048, N_pde: int | None = None,
                         tau_max: float = 100.0, dt_ab: float = 0.05, dt_pde: float | None = None,
                         record_every: float = 10.0, noise: float = 1e-6, seed: int = 0) -> ChaosPair:
    """Run the extended sixth-order PDE and its canonical AB-system side by side.

    Canonical variables relate to the PDE through ``xi = sqrt(delta) x / 2``,
    ``tau = delta t`` and ``U = 1 + delta B / (2 + gamma) + delta (A e^{ix} + c.c.)``.
    """
    gamma, eta = extended_model_from_canonical(alpha, beta)
    s = 2 + gamma
    d = s / 4
    R = float(R_t(K, d)) + R_offset
    ab = CanonicalAB(alpha, d, beta, R)
    grid_ab = Grid1D(wavelengths * 2 * math.pi / K, N_ab)
    L_x = grid_ab.L * 2 / math.sqrt(delta)
    # the carrier e^{ix} must fit the PDE domain; round to whole periods
    L_x = 2 * math.pi * round(L_x / (2 * math.pi))
    N_pde = N_pde or int(2 ** math.ceil(math.log2(L_x / (2 * math.pi) * 16)))
    grid_x = Grid1D(L_x, N_pde)
    mu, nu = extended_model_parameters(gamma, delta, R)
    model = ScalarSixthOrder(mu=mu, nu=nu, eta=eta, gamma=gamma)
    st = _ab_initial(ab, K, grid_ab, noise, seed)

    def to_U(state: ABState):
        xi = math.sqrt(delta) * grid_x.x / 2
        A = np.interp(xi, grid_ab.x, state.A.real, period=grid_ab.L) + 1j * np.interp(
            xi, grid_ab.x, state.A.imag, period=grid_ab.L)
        B = np.interp(xi, grid_ab.x, state.B, period=grid_ab.L)
        return reconstruct_U_AB(A, B, delta, 1.0, grid_x, scalings={"A": 1.0, "B": 1 / s})

    res_ab = integrate_ab(ab, st, grid_ab, dt_ab, tau_max, record_every=record_every, raise_blowup=False)
    dt_pde = dt_pde or 0.05
    U0 = to_U(st)
    res_u = integrate_scalar(model, ScalarState(U0), grid_x, dt_pde, tau_max / delta, u_ref=1.0,
                             record_every=record_every / delta, raise_blowup=False)
    n = min(len(res_ab.snapshots), len(res_u.snapshots))
    return ChaosPair(gamma, eta, delta, ab, grid_x.x, res_ab.times[:n], [s_.U for s_ in res_u.snapshots[:n]],
                     [to_U(s_) for s_ in res_ab.snapshots[:n]], res_ab.blew_up or res_u.blew_up,
                     res_ab.message or res_u.message)
