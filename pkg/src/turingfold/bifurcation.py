"""Fold, Turing and Turing-fold points, asymptotic coefficients and AB-system coefficients."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar, root

from .absystem import CanonicalAB
from .models import (
    GeneralScalarModel,
    ModelError,
    RDModel,
    as_general,
    char_poly_partials,
    characteristic_polynomial,
    is_rd,
)

FOLD_TOL = 1e-9
HOPF_TOL = 1e-8


class BifurcationError(RuntimeError):
    """A locator failed to converge or found a degenerate situation."""


class DegenerateCoefficientError(BifurcationError):
    """A coefficient formula would divide by a vanishing audited quantity."""


@dataclass
class FoldPoint:
    mu_s: float
    u_s: np.ndarray
    v_s: np.ndarray
    p_s: np.ndarray
    nu: float
    flipped: bool = False


@dataclass
class TuringPoint:
    mu_t: float
    k_c: float
    u_t: np.ndarray
    v_t: np.ndarray
    p_t: np.ndarray
    nu: float
    margin: float = float("nan")


@dataclass
class AuditEntry:
    name: str
    value: float
    requirement: str
    passed: bool

    def to_dict(self):
        return {"name": self.name, "value": _num(self.value), "requirement": self.requirement,
                "passed": bool(self.passed)}


@dataclass
class TuringFoldReport:
    model_class: str
    mu_star: float
    nu_star: float
    k_star: float
    u_star: np.ndarray
    expansion: dict
    curvature: dict
    audit: list
    vectors: dict = field(default_factory=dict)
    star_values: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.audit)

    @property
    def failures(self) -> list[str]:
        return [a.name for a in self.audit if not a.passed]

    def to_dict(self) -> dict:
        return {
            "model_class": self.model_class,
            "mu_star": _num(self.mu_star), "nu_star": _num(self.nu_star), "k_star": _num(self.k_star),
            "u_star": _num(self.u_star),
            "expansion": {key: _num(v) for key, v in self.expansion.items()},
            "curvature": {key: _num(v) for key, v in self.curvature.items()},
            "audit": [a.to_dict() for a in self.audit],
            "audit_passed": self.passed,
            "vectors": {key: _num(v) for key, v in self.vectors.items()},
            "star_values": {key: _num(v) for key, v in self.star_values.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TuringFoldReport":
        audit = [AuditEntry(a["name"], a["value"], a["requirement"], a["passed"]) for a in data["audit"]]
        return cls(
            model_class=data["model_class"], mu_star=data["mu_star"], nu_star=data["nu_star"],
            k_star=data["k_star"], u_star=np.atleast_1d(np.asarray(data["u_star"], dtype=float)),
            expansion=_arrays(data["expansion"]), curvature=dict(data["curvature"]), audit=audit,
            vectors=_arrays(data.get("vectors", {})), star_values=_arrays(data.get("star_values", {})),
        )


@dataclass
class ABCoefficients:
    """Raw system ``A_t = c1 A'' + c2 A + c3 AB``, ``B_t = c4 B'' + c5 - c6 r + c7 B^2 + c8 |A|^2``
    together with its canonical form and the connecting scale factors.

    Scale maps: ``A = sA * A~``, ``B = sB * B~``, ``xi~ = s_xi * xi``,
    ``tau~ = s_tau * tau`` and ``R = s_R * r``.
    """

    raw: dict
    alpha: float
    d: float
    beta: float
    scale_maps: dict
    unit_check: float = 1.0

    @property
    def canonical(self) -> tuple[float, float, float]:
        return (self.alpha, self.d, self.beta)

    def to_canonical_ab(self, R: float = 0.0) -> CanonicalAB:
        return CanonicalAB(self.alpha, self.d, self.beta, R)

    def to_dict(self) -> dict:
        return {"raw": {key: _num(v) for key, v in self.raw.items()}, "alpha": _num(self.alpha),
                "d": _num(self.d), "beta": _num(self.beta),
                "scale_maps": {key: _num(v) for key, v in self.scale_maps.items()},
                "unit_check": _num(self.unit_check)}

    @classmethod
    def from_raw(cls, raw: dict) -> "ABCoefficients":
        """Canonicalize a raw AB-system (the same map for every model class)."""
        c1, c2, c3, c4, c5, c6, c7, c8 = (float(raw[f"c{i}"]) for i in range(1, 9))
        for name, val in (("c1", c1), ("c2", c2), ("c3", c3), ("c7", c7)):
            if abs(val) < 1e-14:
                raise DegenerateCoefficientError(f"raw coefficient {name} vanishes")
        if c2 / c1 <= 0:
            raise DegenerateCoefficientError("c2/c1 must be positive for a real xi scaling")
        sB = -c2 / c3
        q = -c7 * sB * sB
        maps = {"A": 1.0, "B": sB, "xi": math.sqrt(c2 / c1), "tau": c2, "R": c6 / q}
        return cls(raw=dict(raw), alpha=c7 / c3, d=c4 * c3 / (c1 * c7), beta=c8 / q,
                   scale_maps=maps, unit_check=c5 / q)


def _num(v):
    if isinstance(v, np.ndarray):
        return [float(x) for x in np.real(v)]
    if isinstance(v, (complex, np.complexfloating)):
        return float(np.real(v))
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, float, np.floating, np.integer)):
        return float(v)
    return v


def _arrays(d: dict) -> dict:
    return {key: (np.asarray(v, dtype=float) if isinstance(v, list) else v) for key, v in d.items()}


# ---------------------------------------------------------------------------
# helpers


def _null_vectors(M: np.ndarray):
    """Unit right null vector v and left null vector p with <p, v> = 1."""
    U, s, Vh = np.linalg.svd(M)
    v = Vh[-1].conj()
    p = U[:, -1].conj()
    v = np.real_if_close(v)
    p = np.real_if_close(p)
    i = int(np.argmax(np.abs(v)))
    if np.real(v[i]) < 0:
        v = -v
    p = p / np.dot(p, v)
    return np.real(v), np.real(p), float(s[-1])


def _scalar_seed_u(gm: GeneralScalarModel, mu: float) -> float:
    poly = gm.reaction.polynomial_in_u(mu)
    if poly is None:
        return 0.0
    dpoly = np.polyder(np.trim_zeros(poly, "f"))
    cands = np.roots(dpoly)
    cands = cands.real[np.abs(cands.imag) < 1e-9]
    if not len(cands):
        return 0.0
    return float(min(cands, key=lambda x: abs(np.polyval(poly, x))))


# ---------------------------------------------------------------------------
# fold


def find_fold(model, nu: float, seed) -> FoldPoint:
    """Saddle-node of the homogeneous problem at fixed ``nu``.

    ``seed`` is ``(u, mu)``; ``u`` may be ``None`` for scalar polynomial reactions.
    """
    u0, mu0 = seed
    if not is_rd(model):
        gm = as_general(model)
        R = gm.reaction
        if u0 is None:
            u0 = _scalar_seed_u(gm, mu0)
        u0 = float(np.atleast_1d(u0)[0])

        def fun(x):
            return [R(x[0], x[1]), R.F_u(x[0], x[1])]

        def jac(x):
            return [[R.F_u(x[0], x[1]), R.F_mu(x[0], x[1])], [R.F_uu(x[0], x[1]), R.F_umu(x[0], x[1])]]

        sol = root(fun, [u0, mu0], jac=jac, method="hybr", options={"xtol": 1e-14})
        u, mu = sol.x
        if max(abs(v) for v in fun(sol.x)) > FOLD_TOL:
            raise BifurcationError(f"fold solve did not converge (residual {fun(sol.x)})")
        v = p = np.array([1.0])
        flipped = False
        if R.F_mu(u, mu) < 0:
            v, p, flipped = -v, -p, True
        if abs(R.F_uu(u, mu)) < 1e-10:
            raise BifurcationError("fold is degenerate: F_uu vanishes")
        return FoldPoint(float(mu), np.array([u]), v, p, float(nu), flipped)

    n = model.n
    u0 = np.zeros(n) if u0 is None else np.asarray(u0, dtype=float)

    def fun(x):
        u, mu = x[:n], x[n]
        return np.concatenate([model.F(u, mu, nu), [np.linalg.det(model.F_u(u, mu, nu))]])

    sol = root(fun, np.concatenate([u0, [mu0]]), method="hybr", options={"xtol": 1e-14})
    u, mu = sol.x[:n], float(sol.x[n])
    Fu = model.F_u(u, mu, nu)
    if np.linalg.norm(model.F(u, mu, nu)) > FOLD_TOL:
        raise BifurcationError("fold solve did not converge")
    v, p, smin = _null_vectors(Fu)
    if smin > 1e-7:
        raise BifurcationError(f"Jacobian is not singular at the fold (smallest singular value {smin:.2e})")
    flipped = False
    if model.F_mu(u, mu, nu) @ p < 0:
        v, p, flipped = -v, -p, True
    if abs(model.F_uu(u, mu, nu, v, v) @ p) < 1e-10:
        raise BifurcationError("fold is degenerate: <F_uu(v,v), p> vanishes")
    return FoldPoint(mu, u, v, p, float(nu), flipped)


# ---------------------------------------------------------------------------
# Turing


def _leading_omega(model, u, k, mu, nu) -> complex:
    if is_rd(model):
        ev = np.linalg.eigvals(model.T(u, k, mu, nu))
        return ev[np.argmax(ev.real)]
    gm = as_general(model)
    return gm.omega(float(u[0]), k, mu, nu)


def _omega_curve(model, u, ks, mu, nu) -> np.ndarray:
    if is_rd(model):
        Fu = model.F_u(u, mu, nu)
        D = np.asarray(model.D)
        mats = Fu[None, :, :] - (ks**2)[:, None, None] * np.diag(D)[None, :, :]
        return np.linalg.eigvals(mats).real.max(axis=1)
    gm = as_general(model)
    return np.asarray(gm.omega(float(u[0]), ks, mu, nu), dtype=float)


def _k_scan_max(model, u, mu, nu) -> float:
    """Wavenumber range beyond which the leading branch is safely negative."""
    if is_rd(model):
        return 10.0 * math.sqrt(max(1.0, np.max(np.abs(model.F_u(u, mu, nu)))) / min(model.D))
    gm = as_general(model)
    coef = np.abs(gm.linear_coefficients(nu, float(u[0])))
    return 4.0 * max(1.0, max(coef[:-1] / max(coef[-1], 1e-300)) ** (1.0 / 2)) if coef[-1] else 10.0


def global_margin(model, u, mu, nu, k_c, n: int = 2000, exclude=(0.0,)) -> float:
    """Largest Re omega on a k-grid away from ``k_c`` and the points in ``exclude``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    kmax = max(3.0 * k_c, _k_scan_max(model, u, mu, nu))
    ks = np.linspace(0.0, kmax, n)
    mask = np.abs(ks - k_c) > 0.1 * k_c
    for e in exclude:
        mask &= np.abs(ks - e) > 0.1 * k_c
    return float(np.max(_omega_curve(model, u, ks[mask], mu, nu)))


def find_turing(model, nu: float, seeds) -> TuringPoint:
    """Turing point ``(mu_t, k_c)`` on the upper homogeneous branch at fixed ``nu``.

    ``seeds`` is a mapping with ``mu`` and ``k`` and optionally ``u``.
    """
    mu0, k0 = float(seeds["mu"]), float(seeds["k"])
    u0 = seeds.get("u")
    if not is_rd(model):
        gm = as_general(model)
        R = gm.reaction
        if u0 is None:
            poly = R.polynomial_in_u(mu0)
            if poly is None:
                raise BifurcationError("scalar Turing search needs a u seed")
            roots = np.roots(np.trim_zeros(poly, "f"))
            roots = roots.real[np.abs(roots.imag) < 1e-9]
            if not len(roots):
                raise BifurcationError(f"no homogeneous state at mu = {mu0}")
            u0 = float(np.max(roots))
        u0 = float(np.atleast_1d(u0)[0])

        def fun(x):
            u, mu, k = x
            return [R(u, mu), R.F_u(u, mu) + gm.G(k, nu, u), gm.G_k(k, nu, u, 1)]

        def jac(x):
            u, mu, k = x
            return [
                [R.F_u(u, mu), R.F_mu(u, mu), 0.0],
                [R.F_uu(u, mu) + gm.G_u(k), R.F_umu(u, mu), gm.G_k(k, nu, u, 1)],
                [gm.G_u(k, 1), 0.0, gm.G_k(k, nu, u, 2)],
            ]

        sol = root(fun, [u0, mu0, k0], jac=jac, method="hybr", options={"xtol": 1e-14})
        u, mu, k = sol.x
        if max(abs(v) for v in fun(sol.x)) > 1e-9:
            raise BifurcationError(f"no Turing point found at nu = {nu}")
        u_t = np.array([u])
        v = p = np.array([1.0])
    else:
        n = model.n
        if u0 is None:
            raise BifurcationError("RD Turing search needs a u seed")
        u0 = np.asarray(u0, dtype=float)

        def fun(x):
            u, mu, k = x[:n], x[n], x[n + 1]
            P = characteristic_polynomial(model, 0.0, u, mu, nu, k)
            h = 1e-6 * max(1.0, abs(k))
            Pk = (characteristic_polynomial(model, 0.0, u, mu, nu, k + h)
                  - characteristic_polynomial(model, 0.0, u, mu, nu, k - h)) / (2 * h)
            return np.concatenate([model.F(u, mu, nu), [P, Pk]])

        sol = root(fun, np.concatenate([u0, [mu0, k0]]), method="hybr", options={"xtol": 1e-14})
        u_t, mu, k = sol.x[:n], float(sol.x[n]), float(sol.x[n + 1])
        if np.max(np.abs(fun(sol.x))) > 1e-8:
            raise BifurcationError(f"no Turing point found at nu = {nu}")
        v, p, _ = _null_vectors(model.T(u_t, k, mu, nu))
    k = abs(float(k))
    if k < 1e-8:
        raise BifurcationError("critical wavenumber collapsed to zero")
    lead = _leading_omega(model, u_t, k, mu, nu)
    if abs(np.imag(lead)) > HOPF_TOL:
        raise BifurcationError("non-stationary Turing instability (complex leading eigenvalue)")
    if abs(np.real(lead)) > 1e-7:
        raise BifurcationError("the neutral mode is not the leading eigenvalue branch")
    margin = global_margin(model, u_t, mu, nu, k, exclude=())
    if margin >= 0:
        raise BifurcationError(f"global margin violated: Re omega reaches {margin:.3e} away from k_c")
    return TuringPoint(float(mu), k, np.atleast_1d(u_t), v, p, float(nu), margin)


# ---------------------------------------------------------------------------
# Turing-fold


def _fold_peak(model, fold: FoldPoint, k_lo: float, k_hi: float) -> tuple[float, float]:
    res = minimize_scalar(lambda k: -np.real(_leading_omega(model, fold.u_s, k, fold.mu_s, fold.nu)),
                          bounds=(k_lo, k_hi), method="bounded", options={"xatol": 1e-12})
    return float(-res.fun), float(res.x)


def _polish_codim2(model, u, mu, nu, k):
    if not is_rd(model):
        gm = as_general(model)
        R = gm.reaction

        def fun(x):
            u, mu, nu, k = x
            return [R(u, mu), R.F_u(u, mu), gm.G(k, nu, u), gm.G_k(k, nu, u, 1)]

        def jac(x):
            u, mu, nu, k = x
            return [
                [R.F_u(u, mu), R.F_mu(u, mu), 0.0, 0.0],
                [R.F_uu(u, mu), R.F_umu(u, mu), 0.0, 0.0],
                [gm.G_u(k), 0.0, gm.G_nu(k), gm.G_k(k, nu, u, 1)],
                [gm.G_u(k, 1), 0.0, gm.G_nu(k, 1), gm.G_k(k, nu, u, 2)],
            ]

        sol = root(fun, [float(u[0]), mu, nu, k], jac=jac, method="hybr", options={"xtol": 1e-15})
        if max(abs(v) for v in fun(sol.x)) > 1e-10:
            raise BifurcationError("Turing-fold polish did not converge")
        return np.array([sol.x[0]]), float(sol.x[1]), float(sol.x[2]), float(sol.x[3])
    n = model.n

    def fun(x):
        u, mu, nu, k = x[:n], x[n], x[n + 1], x[n + 2]
        h = 1e-6 * max(1.0, abs(k))
        P = characteristic_polynomial(model, 0.0, u, mu, nu, k)
        Pk = (characteristic_polynomial(model, 0.0, u, mu, nu, k + h)
              - characteristic_polynomial(model, 0.0, u, mu, nu, k - h)) / (2 * h)
        return np.concatenate([model.F(u, mu, nu), [np.linalg.det(model.F_u(u, mu, nu)), P, Pk]])

    sol = root(fun, np.concatenate([u, [mu, nu, k]]), method="hybr", options={"xtol": 1e-15})
    if np.max(np.abs(fun(sol.x))) > 1e-9:
        raise BifurcationError("Turing-fold polish did not converge")
    return sol.x[:n], float(sol.x[n]), float(sol.x[n + 1]), float(sol.x[n + 2])


def locate_turing_fold(model, nu_seed: float, mu_seed: float, k_seed: float | None = None,
                       u_seed=None, step: float = 0.05, max_expand: int = 40) -> TuringFoldReport:
    """Locate the co-dimension-2 point and fill the report.

    Strategy: along the fold curve the peak of the leading dispersion branch
    away from ``k = 0`` changes sign exactly at the Turing-fold point, so we
    bracket and root-find that peak in ``nu`` (fold solved at each trial
    ``nu``), then polish all unknowns simultaneously with Newton.
    """
    fold = find_fold(model, nu_seed, (u_seed, mu_seed))
    if k_seed is None:
        kmax = _k_scan_max(model, fold.u_s, fold.mu_s, nu_seed)
        ks = np.linspace(kmax / 400, kmax, 400)
        om = _omega_curve(model, fold.u_s, ks, fold.mu_s, nu_seed)
        # skip the branch attached to k = 0
        interior = np.r_[False, (om[1:-1] >= om[:-2]) & (om[1:-1] >= om[2:]), False]
        if not interior.any():
            raise BifurcationError("no interior peak of the dispersion curve at the fold")
        k_seed = float(ks[interior][np.argmax(om[interior])])
    window = (0.5 * k_seed, 1.5 * k_seed)
    cache: dict[float, FoldPoint] = {nu_seed: fold}

    def fold_at(nu):
        nearest = min(cache, key=lambda x: abs(x - nu))
        f = cache[nearest]
        fp = find_fold(model, nu, (f.u_s, f.mu_s))
        cache[nu] = fp
        return fp

    def g(nu):
        return _fold_peak(model, fold_at(nu), *window)[0]

    g0 = g(nu_seed)
    lo = hi = nu_seed
    glo = ghi = g0
    h = step * max(1.0, abs(nu_seed))
    found = False
    for _ in range(max_expand):
        lo2, hi2 = lo - h, hi + h
        glo2, ghi2 = g(lo2), g(hi2)
        if np.sign(glo2) != np.sign(glo):
            hi, ghi, lo, glo, found = lo, glo, lo2, glo2, True
            break
        if np.sign(ghi2) != np.sign(ghi):
            lo, glo, hi, ghi, found = hi, ghi, hi2, ghi2, True
            break
        lo, glo, hi, ghi = lo2, glo2, hi2, ghi2
        h *= 1.5
    if g0 == 0:
        nu_star = nu_seed
    elif not found:
        raise BifurcationError("could not bracket the Turing-fold point in nu")
    else:
        nu_star = brentq(g, lo, hi, xtol=1e-13, rtol=1e-13)
    f = fold_at(nu_star)
    _, k_star = _fold_peak(model, f, *window)
    u, mu, nu, k = _polish_codim2(model, f.u_s, f.mu_s, nu_star, k_star)
    return build_report(model, u, mu, nu, k)


def build_report(model, u, mu, nu, k) -> TuringFoldReport:
    if is_rd(model):
        return _rd_report(model, np.asarray(u, dtype=float), mu, nu, k)
    return _scalar_report(as_general(model), float(np.atleast_1d(u)[0]), mu, nu, k)


def _entry(name, value, requirement):
    checks = {"<0": value < 0, ">0": value > 0, "!=0": abs(value) > 1e-12}
    return AuditEntry(name, float(value), requirement, bool(checks[requirement]))


def _scalar_report(gm: GeneralScalarModel, u, mu, nu, k) -> TuringFoldReport:
    R = gm.reaction
    Fuu, Fmu, Fuuu = R.F_uu(u, mu), R.F_mu(u, mu), R.F_uuu(u, mu)
    Gnu, Gknu = gm.G_nu(k), gm.G_nu(k, 1)
    Gu, Gku = gm.G_u(k), gm.G_u(k, 1)
    Gkk = gm.G_k(k, nu, u, 2)
    rho_kk = gm.G_k(0.0, nu, u, 2)
    s = Fuu + Gu
    u_tilde = Gnu / s
    mu_hat = -Fuu * u_tilde**2 / (2 * Fmu)
    k_tilde = (Gknu - Gku * u_tilde) / Gkk
    omega_tilde = -s * Fmu / (Fuu * u_tilde)
    expansion = {
        "u_tilde": u_tilde, "mu_hat": mu_hat, "k_tilde": k_tilde, "omega_tilde": omega_tilde,
        "u_tilde_s": 0.0, "mu_tilde_s": 0.0, "u_hat_s_computed": False,
    }
    margin = global_margin(gm, [u], mu, nu, k, exclude=(0.0,))
    audit = [
        _entry("F_uu", Fuu, "<0"),
        _entry("F_mu", Fmu, ">0"),
        _entry("rho_kk", rho_kk, "<0"),
        _entry("omega_kk", Gkk, "<0"),
        _entry("G_nu", Gnu, "<0"),
        _entry("F_uu_plus_G_u", s, "<0"),
        _entry("global_margin", margin, "<0"),
    ]
    star = {"F_uu": Fuu, "F_mu": Fmu, "F_uuu": Fuuu, "G_nu": Gnu, "G_knu": Gknu, "G_u": Gu,
            "G_ku": Gku, "G_kk": Gkk, "P_star": gm.P(k, k), "P_sym_star": gm.P_sym(k, k)}
    return TuringFoldReport(
        model_class="scalar", mu_star=float(mu), nu_star=float(nu), k_star=float(k), u_star=np.array([u]),
        expansion=expansion, curvature={"rho_kk": rho_kk, "omega_kk": Gkk}, audit=audit,
        vectors={"v_s": np.array([1.0]), "p_s": np.array([1.0]), "v_t": np.array([1.0]), "p_t": np.array([1.0])},
        star_values=star,
    )


def _rd_report(model: RDModel, u, mu, nu, k) -> TuringFoldReport:
    n = model.n
    Fu = model.F_u(u, mu, nu)
    v_s, p_s, _ = _null_vectors(Fu)
    Fmu = model.F_mu(u, mu, nu)
    if Fmu @ p_s < 0:
        v_s, p_s = -v_s, -p_s
    v_t, p_t, _ = _null_vectors(model.T(u, k, mu, nu))
    Pk = char_poly_partials(model, u, mu, nu, k)
    P0 = char_poly_partials(model, u, mu, nu, 0.0)
    Fnu = model.F_nu(u, mu, nu)
    border = np.zeros((n + 1, n + 1))
    border[:n, :n] = Fu
    border[:n, n] = Fmu
    border[n, :n] = P0["Q_u"]
    border[n, n] = P0["Q_mu"]
    det_border = float(np.linalg.det(border))
    sol = np.linalg.solve(border, np.concatenate([Fnu, [P0["Q_nu"]]]))
    u_tilde_s, mu_tilde_s = sol[:n], float(sol[n])
    Fmu_p = float(Fmu @ p_s)
    Fss = float(model.F_uu(u, mu, nu, v_s, v_s) @ p_s)
    Fst = float(model.F_uu(u, mu, nu, v_s, v_t) @ p_t)
    Ftt = float(model.F_uu(u, mu, nu, v_t, v_t) @ p_s)
    P_lam = Pk["P_lambda"]
    Pu_vs = float(Pk["P_u"] @ v_s)
    omega_tilde_s = (Pk["P_nu"] - Pk["P_mu"] * mu_tilde_s - Pk["P_u"] @ u_tilde_s) / P_lam
    u_bar_t = P_lam * omega_tilde_s / Pu_vs
    mu_hat_t = -0.5 * Fss * (P_lam * omega_tilde_s) ** 2 / (Fmu_p * Pu_vs**2)
    u_tilde_t = u_bar_t * v_s
    k_tilde = (Pk["P_knu"] - Pk["P_kmu"] * mu_tilde_s - Pk["P_ku"] @ (u_tilde_t + u_tilde_s)) / Pk["P_kk"]
    omega_tilde_mu_t = u_bar_t / (2 * mu_hat_t) * Fst
    rho_tilde = -math.sqrt(max(-2 * Fmu_p * Fss * mu_hat_t, 0.0))
    omega_kk = -Pk["P_kk"] / P_lam
    rho_kk = -P0["P_kk"] / P0["P_lambda"]
    ev0 = np.sort(np.linalg.eigvals(Fu).real)[::-1]
    evk = np.sort(np.linalg.eigvals(model.T(u, k, mu, nu)).real)[::-1]
    lead = _leading_omega(model, u, k, mu, nu)
    margin = global_margin(model, u, mu, nu, k, exclude=(0.0,))
    expansion = {
        "u_tilde_s": u_tilde_s, "mu_tilde_s": mu_tilde_s, "u_hat_s_computed": False,
        "u_bar_t": u_bar_t, "u_tilde_t": u_tilde_t, "mu_hat_t": mu_hat_t, "mu_hat": mu_hat_t,
        "k_tilde": k_tilde, "omega_tilde_mu_t": omega_tilde_mu_t, "omega_tilde": omega_tilde_mu_t,
        "rho_tilde": rho_tilde, "omega_tilde_s": omega_tilde_s,
    }
    audit = [
        _entry("F_mu_dot_p_s", Fmu_p, ">0"),
        _entry("F_uu_ss_dot_p_s", Fss, "<0"),
        _entry("bordered_det", det_border, "!=0"),
        _entry("rho_kk", rho_kk, "<0"),
        _entry("omega2_at_0", ev0[1], "<0"),
        _entry("omega_kk", omega_kk, "<0"),
        _entry("P_u_v_s_times_P_lambda", Pu_vs * P_lam, ">0"),
        _entry("F_uu_st_dot_p_t", Fst, "<0"),
        _entry("omega_s_numerator_times_P_lambda", omega_tilde_s * P_lam**2, ">0"),
        _entry("omega2_at_k_star", evk[1], "<0"),
        _entry("global_margin", margin, "<0"),
        AuditEntry("stationary_turing", float(abs(np.imag(lead))), "<=1e-8", bool(abs(np.imag(lead)) <= HOPF_TOL)),
    ]
    star = {"F_mu_p_s": Fmu_p, "F_uu_ss_p_s": Fss, "F_uu_st_p_t": Fst, "F_uu_tt_p_s": Ftt,
            "P_lambda": P_lam, "P_u_v_s": Pu_vs, "P_kk": Pk["P_kk"]}
    return TuringFoldReport(
        model_class="rd", mu_star=float(mu), nu_star=float(nu), k_star=float(k), u_star=np.asarray(u, dtype=float),
        expansion=expansion, curvature={"rho_kk": rho_kk, "omega_kk": omega_kk}, audit=audit,
        vectors={"v_s": v_s, "p_s": p_s, "v_t": v_t, "p_t": p_t}, star_values=star,
    )


# ---------------------------------------------------------------------------
# AB-system and Landau coefficients


def raw_ab_coefficients(report: TuringFoldReport, model) -> dict:
    ex, cv, sv = report.expansion, report.curvature, report.star_values
    if report.model_class == "scalar":
        gm = as_general(model)
        Fuu, Fmu, Gnu, Gu = sv["F_uu"], sv["F_mu"], sv["G_nu"], sv["G_u"]
        k = report.k_star
        return {
            "c1": -0.5 * cv["omega_kk"], "c2": -Gnu, "c3": Fuu + Gu,
            "c4": -0.5 * cv["rho_kk"], "c5": Fmu * ex["mu_hat"], "c6": Fmu, "c7": 0.5 * Fuu,
            "c8": Fuu + gm.P(k, k) + 2 * Gu,
        }
    Fst, Fss, Ftt, Fmu_p = sv["F_uu_st_p_t"], sv["F_uu_ss_p_s"], sv["F_uu_tt_p_s"], sv["F_mu_p_s"]
    return {
        "c1": -0.5 * cv["omega_kk"], "c2": -ex["u_bar_t"] * Fst, "c3": Fst,
        "c4": -0.5 * cv["rho_kk"], "c5": ex["mu_hat_t"] * Fmu_p, "c6": Fmu_p, "c7": 0.5 * Fss, "c8": Ftt,
    }


def ab_coefficients(report: TuringFoldReport, model) -> ABCoefficients:
    """Raw and canonical AB-system coefficients for a located Turing-fold point."""
    denominators = {"F_uu", "F_mu", "G_nu", "omega_kk", "F_uu_ss_dot_p_s", "F_uu_st_dot_p_t",
                    "F_mu_dot_p_s", "P_u_v_s_times_P_lambda", "F_uu_plus_G_u"}
    for a in report.audit:
        if a.name in denominators and abs(a.value) < 1e-12:
            raise DegenerateCoefficientError(f"audited quantity {a.name} vanishes")
    return ABCoefficients.from_raw(raw_ab_coefficients(report, model))


def restricted_scalar_canonical(report: TuringFoldReport, model) -> tuple[float, float, float]:
    """Closed-form canonical triple for scalar models whose dispersion does not depend on u."""
    gm = as_general(model)
    sv, cv = report.star_values, report.curvature
    if abs(sv["G_u"]) > 1e-14:
        raise ValueError("restricted formulas need a u-independent dispersion relation")
    alpha = 0.5
    d = 2 * cv["rho_kk"] / cv["omega_kk"]
    beta = -2 * (sv["F_uu"] + gm.P(report.k_star, report.k_star)) * sv["F_uu"] / sv["G_nu"] ** 2
    return alpha, d, beta


def extended_model_canonical(gamma: float, eta: float) -> tuple[float, float, float]:
    """Canonical triple of the sixth-order example with the ``gamma U U''`` term."""
    s = 2.0 + gamma
    return 1.0 / s, s / 4.0, -2.0 * s * s * (1.0 + gamma - eta)


def extended_model_from_canonical(alpha: float, beta: float) -> tuple[float, float]:
    """Inverse of :func:`extended_model_canonical` restricted to (alpha, beta) -> (gamma, eta)."""
    gamma = 1.0 / alpha - 2.0
    s = 2.0 + gamma
    eta = 1.0 + gamma + beta / (2.0 * s * s)
    return gamma, eta


def extended_model_parameters(gamma: float, delta: float, R: float) -> tuple[float, float]:
    """``(mu, nu)`` of the extended sixth-order model realising canonical ``R`` at distance ``delta``."""
    s = 2.0 + gamma
    return -1.0 + (1.0 - R) * delta**2 / s**2, 1.0 - gamma - delta


@dataclass
class LandauResult:
    L: float
    L_star: float
    delta: float
    beta: float | None = None
    sign_relation: bool | None = None
    flag: str = ""


def landau_full(model, turing: TuringPoint) -> float:
    """Cubic Ginzburg-Landau coefficient at a Turing point (finite distance from the co-dimension-2 point)."""
    u, mu, nu, k = turing.u_t, turing.mu_t, turing.nu, turing.k_c
    if not is_rd(model):
        gm = as_general(model)
        u0 = float(u[0])
        R = gm.reaction
        Fu = R.F_u(u0, mu)
        Q = gm.quadratic_interaction
        w2k = Fu + gm.G(2 * k, nu, u0)
        return float(-Q(0.0, k, u0, mu) * Q(k, -k, u0, mu) / Fu
                     - Q(2 * k, -k, u0, mu) * Q(k, k, u0, mu) / (2 * w2k)
                     + 0.5 * R.F_uuu(u0, mu))
    v, p = turing.v_t, turing.p_t
    Fu = model.F_u(u, mu, nu)
    q = model.F_uu(u, mu, nu, v, v)
    x0 = np.linalg.solve(Fu, q)
    x2 = np.linalg.solve(Fu - 4 * k * k * model.Dmat, q)
    val = (-model.F_uu(u, mu, nu, x0, v) - 0.5 * model.F_uu(u, mu, nu, x2, v)
           + 0.5 * model.F_uuu(u, mu, nu, v, v, v))
    return float(val @ p / (v @ p))


def landau_star(report: TuringFoldReport, model) -> float:
    """Leading coefficient ``L*`` with ``L = L*/delta + O(1)``."""
    sv, ex = report.star_values, report.expansion
    if report.model_class == "scalar":
        raw = raw_ab_coefficients(report, model)
        s = sv["F_uu"] + sv["G_u"]
        return float(-s * s * raw["c8"] / (sv["F_uu"] * sv["G_nu"]))
    return float(-sv["F_uu_st_p_t"] * sv["F_uu_tt_p_s"] / ex["rho_tilde"])


def landau_coefficient(report: TuringFoldReport, model, delta: float, seeds=None) -> LandauResult:
    """Landau coefficient at ``nu = nu* - delta`` (full formula) and its leading part.

    The sign relation ``sign(L*) = -sign(beta)`` is evaluated and recorded;
    it is unavailable (flagged) when ``|beta|`` is below 1e-10.
    """
    if not 0 < delta:
        raise ValueError("delta must be positive")
    L_star = landau_star(report, model)
    nu = report.nu_star - delta
    if seeds is None:
        seeds = turing_seed_from_report(report, delta)
    tp = find_turing(model, nu, seeds)
    L = landau_full(model, tp)
    beta = ab_coefficients(report, model).beta
    if abs(beta) < 1e-10:
        return LandauResult(L, L_star, delta, beta, None, "beta vanishes: sign relation unavailable")
    return LandauResult(L, L_star, delta, beta, bool(np.sign(L_star) == -np.sign(beta)))


def turing_seed_from_report(report: TuringFoldReport, delta: float) -> dict:
    """Seeds for :func:`find_turing` at ``nu* - delta`` from the leading-order expansions."""
    ex = report.expansion
    if report.model_class == "scalar":
        u = report.u_star + ex["u_tilde"] * delta
        mu = report.mu_star + ex["mu_hat"] * delta**2
    else:
        u = report.u_star + (np.asarray(ex["u_tilde_t"]) + np.asarray(ex["u_tilde_s"])) * delta
        mu = report.mu_star + ex["mu_tilde_s"] * delta + ex["mu_hat_t"] * delta**2
    return {"u": u, "mu": mu, "k": report.k_star + ex["k_tilde"] * delta}


def fold_seed_from_report(report: TuringFoldReport, delta: float):
    ex = report.expansion
    if report.model_class == "scalar":
        return (report.u_star, report.mu_star)
    return (report.u_star + np.asarray(ex["u_tilde_s"]) * delta, report.mu_star + ex["mu_tilde_s"] * delta)
