"""ETDRK4 time integration of the AB-system and of the underlying PDEs."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .absystem import CanonicalAB
from .grid import Grid1D
from .models import RDModel, as_general, is_rd

BLOWUP = 1e6
STEADY_TOL = 1e-9
CONTOUR_POINTS = 32

__all__ = [
    "Grid1D", "ETDRK4", "RawAB", "ABState", "ScalarState", "Ramp", "BlowUpError", "RunResult",
    "step_ab", "step_scalar", "integrate_ab", "integrate_scalar", "integrate_rd", "integrate_ode",
    "reconstruct_U_AB", "plane_wave_U_AB", "ramp_parameter",
]


class BlowUpError(RuntimeError):
    def __init__(self, t, norm):
        super().__init__(f"solution blew up at t = {t:.6g} (max norm {norm:.3e})")
        self.t = t
        self.norm = norm


class ETDRK4:
    """Fourth-order exponential time differencing for ``v' = L v + N(v, t)``.

    ``L`` is a diagonal (real) symbol; the phi-function coefficients are
    evaluated by a contour integral so small ``|L dt|`` causes no cancellation.
    """

    def __init__(self, L: np.ndarray, dt: float, nonlinear: Callable, m: int = CONTOUR_POINTS):
        self.L = np.asarray(L, dtype=float)
        self.dt = float(dt)
        self.nonlinear = nonlinear
        h = self.dt
        self.E = np.exp(h * self.L)
        self.E2 = np.exp(h * self.L / 2)
        r = np.exp(1j * np.pi * (np.arange(1, m + 1) - 0.5) / m)
        LR = h * self.L[..., None] + r
        eLR = np.exp(LR)
        self.Q = h * np.real(np.mean((np.exp(LR / 2) - 1) / LR, axis=-1))
        self.f1 = h * np.real(np.mean((-4 - LR + eLR * (4 - 3 * LR + LR**2)) / LR**3, axis=-1))
        self.f2 = h * np.real(np.mean((2 + LR + eLR * (LR - 2)) / LR**3, axis=-1))
        self.f3 = h * np.real(np.mean((-4 - 3 * LR - LR**2 + eLR * (4 - LR)) / LR**3, axis=-1))

    def step(self, v: np.ndarray, t: float) -> np.ndarray:
        h = self.dt
        N = self.nonlinear
        Nv = N(v, t)
        a = self.E2 * v + self.Q * Nv
        Na = N(a, t + h / 2)
        b = self.E2 * v + self.Q * Na
        Nb = N(b, t + h / 2)
        c = self.E2 * a + self.Q * (2 * Nb - Nv)
        Nc = N(c, t + h)
        return self.E * v + self.f1 * Nv + 2 * self.f2 * (Na + Nb) + self.f3 * Nc


# ---------------------------------------------------------------------------
# states and schedules


@dataclass
class ABState:
    A: np.ndarray
    B: np.ndarray
    tau: float = 0.0

    def copy(self):
        return ABState(np.array(self.A, dtype=complex), np.array(self.B, dtype=float), self.tau)


@dataclass
class ScalarState:
    U: np.ndarray
    t: float = 0.0


@dataclass(frozen=True)
class Ramp:
    """Linear schedule ``value(t) = start + rate * t`` for one parameter."""

    param: str = "mu"
    start: float = 0.0
    rate: float = 0.0

    def __call__(self, t: float) -> float:
        return self.start + self.rate * t


def ramp_parameter(param: str, start: float, rate: float) -> Ramp:
    return Ramp(param, float(start), float(rate))


@dataclass
class RunResult:
    state: object
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    converged: bool = False
    steps: int = 0
    blew_up: bool = False
    message: str = ""


@dataclass(frozen=True)
class RawAB:
    """``A_t = c1 A'' + c2 A + c3 A B``, ``B_t = c4 B'' + c5 - c6 r + c7 B^2 + c8 |A|^2``."""

    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    c6: float
    c7: float
    c8: float
    r: float = 0.0

    @classmethod
    def from_canonical(cls, ab: CanonicalAB) -> "RawAB":
        a = ab.alpha
        return cls(1.0, 1.0, -1.0, a * ab.d, a * (1.0 - ab.R), 0.0, -a, a * ab.beta, 0.0)

    @classmethod
    def from_dict(cls, raw: dict, r: float = 0.0) -> "RawAB":
        return cls(*(float(raw[f"c{i}"]) for i in range(1, 9)), r=r)


def _as_raw(ab) -> RawAB:
    if isinstance(ab, RawAB):
        return ab
    if isinstance(ab, CanonicalAB):
        return RawAB.from_canonical(ab)
    raise TypeError(f"expected CanonicalAB or RawAB, got {type(ab).__name__}")


# ---------------------------------------------------------------------------
# AB-system


def _ab_integrator(ab, grid: Grid1D, dt: float) -> ETDRK4:
    raw = _as_raw(ab)
    k2 = grid.real_k**2
    LA = raw.c2 - raw.c1 * k2
    LB = -raw.c4 * k2
    L = np.stack([LA, LA, LB])
    mask = grid.real_mask
    const = raw.c5 - raw.c6 * raw.r

    def nonlinear(v, t):
        ar, ai, b = grid.real_inverse(v)
        out = np.stack([raw.c3 * ar * b, raw.c3 * ai * b,
                        const + raw.c7 * b * b + raw.c8 * (ar * ar + ai * ai)])
        return mask * grid.real_forward(out)

    return ETDRK4(L, dt, nonlinear)


def _ab_pack(state: ABState, grid) -> np.ndarray:
    A = np.asarray(state.A, dtype=complex)
    return grid.real_forward(np.stack([A.real, A.imag, np.asarray(state.B, dtype=float)]))


def _ab_unpack(v, grid, tau) -> ABState:
    ar, ai, b = grid.real_inverse(v)
    return ABState(ar + 1j * ai, b, tau)


def step_ab(ab, state: ABState, dt: float, grid: Grid1D) -> ABState:
    """One ETDRK4 step of the canonical (or raw) AB-system."""
    integ = _ab_integrator(ab, grid, dt)
    v = integ.step(_ab_pack(state, grid), state.tau)
    out = _ab_unpack(v, grid, state.tau + dt)
    _check_blowup(np.concatenate([np.abs(out.A), np.abs(out.B)]), out.tau)
    return out


def _check_blowup(values, t):
    norm = float(np.max(np.abs(values)))
    if not np.isfinite(norm) or norm > BLOWUP:
        raise BlowUpError(t, norm)


def _run(integ: ETDRK4, v, t0, t_end, dt, unpack, record_every=None, steady_tol=None, steady_dt=1.0,
         diag=None, raise_blowup=True, keep_snapshots=True):
    n_steps = int(round((t_end - t0) / dt))
    rec = max(1, int(round(record_every / dt))) if record_every else 0
    check = max(1, int(round(steady_dt / dt)))
    res = RunResult(state=None)
    t = t0
    last = None
    for i in range(1, n_steps + 1):
        # overflow is caught by the blow-up check below
        with np.errstate(over="ignore", invalid="ignore"):
            v = integ.step(v, t)
        t = t0 + i * dt
        if i % 10 == 0 or i == n_steps:
            phys = unpack(v, t, physical=True)
            norm = float(np.max(np.abs(phys)))
            if not np.isfinite(norm) or norm > BLOWUP:
                res.blew_up = True
                res.message = f"blow-up at t = {t:.6g} (max norm {norm:.3e})"
                res.steps = i
                res.state = unpack(v, t)
                if raise_blowup:
                    raise BlowUpError(t, norm)
                return res
        if rec and i % rec == 0:
            res.times.append(t)
            if keep_snapshots:
                res.snapshots.append(unpack(v, t))
            if diag is not None:
                res.diagnostics.append(diag(v, t))
        if steady_tol is not None and i % check == 0:
            phys = unpack(v, t, physical=True)
            if last is not None and np.max(np.abs(phys - last)) < steady_tol:
                res.converged = True
                res.steps = i
                res.state = unpack(v, t)
                return res
            last = phys
    res.steps = n_steps
    res.state = unpack(v, t)
    return res


def integrate_ab(ab, state: ABState, grid: Grid1D, dt: float, t_end: float, record_every: float | None = None,
                 steady_tol: float | None = None, raise_blowup: bool = True, diagnostic: Callable | None = None,
                 keep_snapshots: bool = True) -> RunResult:
    """Integrate the AB-system from ``state.tau`` to ``t_end``.

    ``diagnostic(state)`` is evaluated at every record time; set
    ``keep_snapshots=False`` to store only those values.
    """
    integ = _ab_integrator(ab, grid, dt)
    diag = None
    if diagnostic is not None:
        def diag(v, t):
            return diagnostic(_ab_unpack(v, grid, t))

    def unpack(v, t, physical=False):
        s = _ab_unpack(v, grid, t)
        if physical:
            return np.concatenate([s.A.real, s.A.imag, s.B])
        return s

    return _run(integ, _ab_pack(state, grid), state.tau, t_end, dt, unpack, record_every, steady_tol,
                diag=diag, raise_blowup=raise_blowup, keep_snapshots=keep_snapshots)


# ---------------------------------------------------------------------------
# scalar PDE


def _scalar_integrator(model, grid: Grid1D, dt: float, u_ref: float, mu_of_t: Callable, nu: float) -> ETDRK4:
    gm = as_general(model)
    R = gm.reaction
    k = grid.real_k
    mu0 = mu_of_t(0.0)
    Fu_ref = float(R.F_u(u_ref, mu0))
    L = Fu_ref + gm.G(k, nu, u_ref)
    mask = grid.real_mask
    powers = {j: (-k * k) ** j for j in range(1, gm.m + 1)}
    need = sorted({j for (j, l) in gm.b for j in (j, l)} | {j for j, c in enumerate(gm.c, 1) if c})

    def nonlinear(v, t):
        U = grid.real_inverse(v)
        d = {j: grid.real_inverse(powers[j] * v) for j in need}
        out = R(U, mu_of_t(t)) - Fu_ref * U
        for j, cj in enumerate(gm.c, start=1):
            if cj:
                out = out + cj * (U - u_ref) * d[j]
        for (j, l), bjl in gm.b.items():
            out = out + bjl * d[j] * d[l]
        return mask * grid.real_forward(out)

    return ETDRK4(L, dt, nonlinear)


def _mu_schedule(model, mu, ramp):
    if ramp is not None:
        if ramp.param != "mu":
            raise ValueError("only mu ramps are supported")
        return ramp
    base = model.mu if mu is None else mu
    return lambda t: base


def step_scalar(model, state: ScalarState, dt: float, grid: Grid1D, mu=None, nu=None,
                u_ref: float | None = None) -> ScalarState:
    """One ETDRK4 step of a scalar higher-order PDE."""
    nu = model.nu if nu is None else nu
    mu_t = _mu_schedule(model, mu, None)
    u_ref = float(np.mean(state.U)) if u_ref is None else u_ref
    integ = _scalar_integrator(model, grid, dt, u_ref, lambda t: mu_t(state.t + t), nu)
    U = grid.real_inverse(integ.step(grid.real_forward(np.asarray(state.U, dtype=float)), 0.0))
    _check_blowup(U, state.t + dt)
    return ScalarState(U, state.t + dt)


def integrate_scalar(model, state: ScalarState, grid: Grid1D, dt: float, t_end: float, mu=None, nu=None,
                     ramp: Ramp | None = None, u_ref: float | None = None, record_every: float | None = None,
                     steady_tol: float | None = None, raise_blowup: bool = True,
                     keep_snapshots: bool = True) -> RunResult:
    """Integrate a scalar model; diagnostics hold ``(mu(t), rms(U))`` at each record."""
    nu = model.nu if nu is None else nu
    mu_t = _mu_schedule(model, mu, ramp)
    t0 = state.t
    u_ref = float(np.mean(state.U)) if u_ref is None else u_ref
    integ = _scalar_integrator(model, grid, dt, u_ref, mu_t, nu)

    def unpack(v, t, physical=False):
        U = grid.real_inverse(v)
        return U if physical else ScalarState(U, t)

    def diag(v, t):
        return (float(mu_t(t)), grid.l2_norm(grid.real_inverse(v)))

    return _run(integ, grid.real_forward(np.asarray(state.U, dtype=float)), t0, t_end, dt, unpack,
                record_every, steady_tol, diag=diag, raise_blowup=raise_blowup, keep_snapshots=keep_snapshots)


def integrate_rd(model: RDModel, U0: np.ndarray, grid: Grid1D, dt: float, t_end: float, mu=None, nu=None,
                 record_every=None, steady_tol=None, raise_blowup: bool = True) -> RunResult:
    """Integrate ``U_t = F(U) + D U_xx`` (diffusion exact, reaction explicit)."""
    if not is_rd(model):
        raise TypeError("integrate_rd needs an RDModel")
    mu = model.mu if mu is None else mu
    nu = model.nu if nu is None else nu
    k2 = grid.real_k**2
    L = -np.asarray(model.D)[:, None] * k2[None, :]
    mask = grid.real_mask

    def nonlinear(v, t):
        return mask * grid.real_forward(model.F(grid.real_inverse(v), mu, nu))

    integ = ETDRK4(L, dt, nonlinear)

    def unpack(v, t, physical=False):
        return grid.real_inverse(v)

    return _run(integ, grid.real_forward(np.asarray(U0, dtype=float)), 0.0, t_end, dt, unpack,
                record_every, steady_tol, raise_blowup=raise_blowup)


def integrate_ode(model, u0: float, t_end: float, ramp: Ramp | None = None, mu=None, record_every: float = 1.0,
                  collapse_level: float | None = None):
    """Spatially homogeneous dynamics ``u' = F(u; mu(t))`` (scalar models)."""
    gm = as_general(model)
    mu_t = _mu_schedule(model, mu, ramp)
    t_eval = np.arange(0.0, t_end + 0.5 * record_every, record_every)
    events = None
    if collapse_level is not None:
        def ev(t, y):
            return y[0] - collapse_level
        ev.terminal = True
        events = [ev]
    sol = solve_ivp(lambda t, y: [gm.reaction(y[0], mu_t(t))], (0.0, t_end), [u0], t_eval=t_eval,
                    rtol=1e-9, atol=1e-12, events=events, method="LSODA")
    mus = np.array([mu_t(t) for t in sol.t])
    return sol.t, sol.y[0], mus


# ---------------------------------------------------------------------------
# reconstruction


def reconstruct_U_AB(A, B, delta: float, k_star: float, grid: Grid1D, scalings: dict | None = None,
                     u_star: float = 1.0, v_s=None, v_t=None) -> np.ndarray:
    """Leading-order physical field ``u* + delta (B + A e^{i k* x} + c.c.)``.

    ``A`` and ``B`` are sampled on ``grid.x``; ``scalings`` maps canonical to raw
    amplitudes (keys ``A`` and ``B``, default 1). For RD models pass the null
    vectors ``v_s`` and ``v_t`` to get an ``(n, N)`` field.
    """
    if grid.bc == "periodic":
        periods = k_star * grid.L / (2 * np.pi)
        if abs(periods - round(periods)) > 1e-9:
            raise ValueError("carrier wavelength is incommensurate with the periodic domain")
    sc = {"A": 1.0, "B": 1.0, **(scalings or {})}
    A = sc["A"] * np.asarray(A, dtype=complex) * np.ones_like(grid.x)
    B = sc["B"] * np.asarray(B, dtype=float) * np.ones_like(grid.x)
    wave = 2 * np.real(A * np.exp(1j * k_star * grid.x))
    if v_s is None:
        return u_star + delta * (B + wave)
    v_s = np.asarray(v_s, dtype=float)[:, None]
    v_t = np.asarray(v_t, dtype=float)[:, None]
    return np.asarray(u_star, dtype=float)[:, None] + delta * (B[None] * v_s + wave[None] * v_t)


def plane_wave_U_AB(x, delta: float, K: float, r: float, eta: float) -> np.ndarray:
    """Plane-wave reconstruction for the sixth-order example in raw AB variables."""
    B_p = 0.5 * (1 - 4 * K * K)
    A2 = (B_p * B_p + r - 0.25) / (2 * (eta - 1))
    if A2 < 0:
        raise ValueError("plane wave does not exist for these parameters")
    return 1 + delta * B_p + 2 * delta * math.sqrt(A2) * np.cos((1 + math.sqrt(delta) * K) * np.asarray(x))
