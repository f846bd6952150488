"""Canonical AB-system: plane waves, stability boundaries, spectra and Busse maps.

The canonical system is::

    A_tau = A_xixi + A - A B
    B_tau / alpha = d B_xixi + 1 - R - B^2 + beta |A|^2
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

CLASSES = ("nonexistent", "stable", "ode_unstable", "sideband_unstable", "turing_unstable")
SCAN_POINTS = 2000
PROXIMITY_TOL = 1e-6
SCAN_TOL = 1e-9


class DegenerateABError(ValueError):
    """beta = 0: the plane-wave family degenerates."""


class BoundaryProximityWarning(UserWarning):
    pass


class ScanDisagreementWarning(UserWarning):
    """The eigenvalue scan finds growth where the closed forms predict stability."""


@dataclass(frozen=True)
class CanonicalAB:
    alpha: float
    d: float
    beta: float
    R: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.d > 0:
            raise ValueError(f"d must be positive, got {self.d}")

    def with_R(self, R: float) -> "CanonicalAB":
        return CanonicalAB(self.alpha, self.d, self.beta, R)

    def rhs(self, A, B, A_xx, B_xx):
        """Right-hand sides ``(A_tau, B_tau)`` given the fields and their second derivatives."""
        dA = A_xx + A - A * B
        dB = self.alpha * (self.d * B_xx + 1.0 - self.R - B * B + self.beta * np.abs(A) ** 2)
        return dA, dB

    def to_dict(self):
        return {"alpha": self.alpha, "d": self.d, "beta": self.beta, "R": self.R}


@dataclass(frozen=True)
class PlaneWaveState:
    K: float
    R: float
    A_bar: float
    B_bar: float
    branch: str

    def fields(self, xi):
        xi = np.asarray(xi, dtype=float)
        return self.A_bar * np.exp(1j * self.K * xi), np.full_like(xi, self.B_bar)


@dataclass
class StabilityReport:
    cls: str
    max_growth: float
    k_critical: float
    boundaries: dict
    warning: str = ""
    scan_class: str = ""

    def to_dict(self):
        return {"class": self.cls, "max_growth": self.max_growth, "k_critical": self.k_critical,
                "boundaries": self.boundaries, "warning": self.warning}


def _check_beta(ab: CanonicalAB):
    if ab.beta == 0:
        raise DegenerateABError("beta = 0: no plane-wave family (degenerate AB-system)")


def R_e(K):
    K2 = np.asarray(K, dtype=float) ** 2
    return 1.0 - (1.0 - K2) ** 2


def R_s(K):
    K2 = np.asarray(K, dtype=float) ** 2
    return -5.0 * K2**2 + 6.0 * K2


def R_t(K, d: float):
    K2 = np.asarray(K, dtype=float) ** 2
    return 1.0 + (1.0 + (2 * d - 1) * K2) ** 2 / (2 * d) - (1.0 - K2) ** 2


def turing_exists(K, d: float):
    return np.asarray(K, dtype=float) ** 2 > 1.0 / (2 * d + 1)


def tangency_point(d: float) -> tuple[float, float]:
    """``(K_st, R_st)`` where the Turing and sideband curves touch."""
    return 1.0 / math.sqrt(2 * d + 1), (12 * d + 1) / (2 * d + 1) ** 2


def critical_wavenumber(K: float, d: float) -> float:
    """Wavenumber of the Turing mode of the plane wave at ``R = R_t(K)``."""
    k2 = ((2 * d + 1) * K * K - 1) / d
    return math.sqrt(k2) if k2 > 0 else float("nan")


def homogeneous_state(ab: CanonicalAB, sign: int = 1) -> PlaneWaveState:
    if ab.R > 1:
        raise ValueError("homogeneous states need R <= 1")
    B = sign * math.sqrt(1.0 - ab.R)
    return PlaneWaveState(0.0, ab.R, 0.0, B, "homogeneous_plus" if sign > 0 else "homogeneous_minus")


def plane_wave(ab: CanonicalAB, K: float) -> PlaneWaveState | None:
    """Periodic plane wave ``(A_bar e^{iK xi}, B_bar)``; ``None`` where it does not exist."""
    _check_beta(ab)
    B = 1.0 - K * K
    A2 = (B * B + ab.R - 1.0) / ab.beta
    if A2 < 0:
        return None
    return PlaneWaveState(float(K), ab.R, math.sqrt(A2), B, "periodic")


def boundary_curves(ab: CanonicalAB, K: float) -> dict:
    d = ab.d
    exists = bool(turing_exists(K, d))
    return {"R_e": float(R_e(K)), "R_s": float(R_s(K)), "R_t": float(R_t(K, d)) if exists else None,
            "exists_turing": exists}


def spectral_matrix(ab: CanonicalAB, wave: PlaneWaveState, k: float) -> np.ndarray:
    """Linearization of the canonical system about a plane wave for perturbations ``e^{ik xi}``."""
    K, A, B = wave.K, wave.A_bar, wave.B_bar
    a, d, b = ab.alpha, ab.d, ab.beta
    diag = 1.0 - K * K - B - k * k
    return np.array([
        [diag, -2j * k * K, -A],
        [2j * k * K, diag, 0.0],
        [2 * a * b * A, 0.0, -2 * a * B - d * a * k * k],
    ], dtype=complex)


def spectral_determinant(ab: CanonicalAB, wave: PlaneWaveState, k) -> np.ndarray:
    """Closed form of ``det`` of the spectral matrix on the periodic branch."""
    k = np.asarray(k, dtype=float)
    K, A, B = wave.K, wave.A_bar, wave.B_bar
    return -ab.alpha * k**2 * ((2 * B + ab.d * k**2) * (k**2 - 4 * K * K) + 2 * ab.beta * A * A)


def _real_spectral_stack(ab: CanonicalAB, K, A, B, ks) -> np.ndarray:
    # diag(1, i, 1) conjugation turns the spectral matrix into a real one
    a, d, b = ab.alpha, ab.d, ab.beta
    M = np.zeros(np.shape(ks) + (3, 3))
    diag = 1.0 - K * K - B - ks**2
    M[..., 0, 0] = diag
    M[..., 1, 1] = diag
    M[..., 0, 1] = 2 * ks * K
    M[..., 1, 0] = 2 * ks * K
    M[..., 0, 2] = -A
    M[..., 2, 0] = 2 * a * b * A
    M[..., 2, 2] = -2 * a * B - d * a * ks**2
    return M


def growth_curve(ab: CanonicalAB, wave: PlaneWaveState, ks) -> np.ndarray:
    """Largest real part of the spectrum for each k."""
    ks = np.asarray(ks, dtype=float)
    M = _real_spectral_stack(ab, wave.K, wave.A_bar, wave.B_bar, ks)
    return np.linalg.eigvals(M).real.max(axis=-1)


def scan_growth(ab: CanonicalAB, wave: PlaneWaveState, n: int = SCAN_POINTS) -> tuple[float, float]:
    kc = critical_wavenumber(wave.K, ab.d)
    kmax = 3.0 * max(1.0, abs(wave.K), 0.0 if math.isnan(kc) else kc)
    ks = np.linspace(0.0, kmax, n)
    g = growth_curve(ab, wave, ks)
    # the translation mode gives a zero eigenvalue at k = 0; skip it
    i = int(np.argmax(g[1:])) + 1
    return float(g[i]), float(ks[i])


def closed_form_class(ab: CanonicalAB, K: float) -> tuple[str, str]:
    """Class from the closed-form boundaries plus a proximity note."""
    _check_beta(ab)
    R = ab.R
    re, rs = float(R_e(K)), float(R_s(K))
    near = []
    if abs(R - re) < PROXIMITY_TOL:
        near.append("R_e")
    if ab.beta > 0 and R < re or ab.beta < 0 and R > re:
        cls = "nonexistent"
    elif ab.beta < 0 or abs(K) >= 1:
        cls = "ode_unstable"
    else:
        rt = float(R_t(K, ab.d)) if turing_exists(K, ab.d) else None
        if abs(R - rs) < PROXIMITY_TOL:
            near.append("R_s")
        if rt is not None and abs(R - rt) < PROXIMITY_TOL:
            near.append("R_t")
        if R < rs:
            cls = "sideband_unstable"
        elif rt is not None and R < rt:
            cls = "turing_unstable"
        else:
            cls = "stable"
    note = f"within {PROXIMITY_TOL:g} of boundary {', '.join(near)}" if near else ""
    return cls, note


def classify(ab: CanonicalAB, K: float, scan: bool = True) -> StabilityReport:
    """Stability class of the plane wave with wavenumber K at ``ab.R``.

    The closed-form decision is authoritative; a brute-force eigenvalue
    scan fills ``max_growth`` and ``k_critical`` as a cross-check. The closed
    forms only see real eigenvalues crossing zero, so a complex pair that
    crosses (possible for small alpha near K = +-1) shows up as a warning.
    """
    cls, note = closed_form_class(ab, K)
    bounds = boundary_curves(ab, K)
    growth, kcrit = float("nan"), float("nan")
    scan_cls = ""
    if scan and cls != "nonexistent":
        wave = plane_wave(ab, K)
        growth, kcrit = scan_growth(ab, wave)
        scan_cls = "stable" if growth <= SCAN_TOL else "unstable"
        if cls == "stable" and scan_cls == "unstable" and not note:
            warnings.warn(f"K={K}, R={ab.R}: eigenvalue scan finds growth {growth:.3g} at k = {kcrit:.4g} "
                          "inside the closed-form stable region", ScanDisagreementWarning, stacklevel=2)
    if note:
        warnings.warn(f"K={K}, R={ab.R}: {note}", BoundaryProximityWarning, stacklevel=2)
    return StabilityReport(cls, growth, kcrit, bounds, note, scan_cls)


@dataclass
class BusseMap:
    K: np.ndarray
    R: np.ndarray
    classes: np.ndarray
    max_growth: np.ndarray
    ab: CanonicalAB
    curves: dict = field(default_factory=dict)

    def stable_fraction(self) -> float:
        return float(np.mean(self.classes == "stable"))

    def rows(self):
        for i, R in enumerate(self.R):
            for j, K in enumerate(self.K):
                yield float(K), float(R), str(self.classes[i, j]), float(self.max_growth[i, j])


def busse_map(ab: CanonicalAB, K_range=(-1.2, 1.2), R_range=(0.0, 3.0), resolution=(121, 121),
              scan: bool = False) -> BusseMap:
    """Classification raster over the (K, R) plane (rows are R values)."""
    nK, nR = resolution
    Ks = np.linspace(*K_range, nK)
    Rs = np.linspace(*R_range, nR)
    classes = np.empty((nR, nK), dtype=object)
    growth = np.full((nR, nK), np.nan)
    for i, R in enumerate(Rs):
        abR = ab.with_R(float(R))
        for j, K in enumerate(Ks):
            cls, _ = closed_form_class(abR, float(K))
            classes[i, j] = cls
            if scan and cls != "nonexistent":
                growth[i, j] = scan_growth(abR, plane_wave(abR, float(K)))[0]
    curves = {"R_e": R_e(Ks), "R_s": R_s(Ks),
              "R_t": np.where(turing_exists(Ks, ab.d), R_t(Ks, ab.d), np.nan)}
    return BusseMap(Ks, Rs, classes, growth, ab, curves)


def K_existence(R: float) -> float:
    """Positive K with ``R_e(K) = R``."""
    return math.sqrt(1.0 - math.sqrt(1.0 - R))


def K_sideband(R: float) -> float:
    """Smaller positive K with ``R_s(K) = R``."""
    return math.sqrt((6.0 - math.sqrt(36.0 - 20.0 * R)) / 10.0)


def eckhaus_ratio(ab: CanonicalAB | None, R_small: float) -> float:
    """Ratio of the sideband-stable to the existence half-width in K at small R."""
    if not 0 < R_small < 1:
        raise ValueError("R_small must lie in (0, 1)")
    return K_sideband(R_small) / K_existence(R_small)


def scan_classes(ab: CanonicalAB, Ks, Rs, n: int = 400, chunk: int = 200_000) -> np.ndarray:
    """Brute-force labels (``nonexistent`` / ``stable`` / ``unstable``) on a (K, R) raster.

    Independent of the closed-form boundaries: each existing wave is
    labelled by the eigenvalues of its spectral matrix on ``n`` wavenumbers.
    """
    _check_beta(ab)
    Ks = np.asarray(Ks, dtype=float)
    Rs = np.asarray(Rs, dtype=float)
    KK, RR = np.meshgrid(Ks, Rs)
    B = 1.0 - KK**2
    A2 = (B * B + RR - 1.0) / ab.beta
    labels = np.where(A2 < 0, "nonexistent", "stable").astype(object)
    idx = np.flatnonzero(A2 >= 0)
    K, Bv, A = KK.ravel()[idx], B.ravel()[idx], np.sqrt(A2.ravel()[idx])
    kc2 = np.maximum(((2 * ab.d + 1) * K * K - 1) / ab.d, 0.0)
    kmax = 3.0 * np.maximum.reduce([np.ones_like(K), np.abs(K), np.sqrt(kc2)])
    frac = np.linspace(0.0, 1.0, n)[1:]
    growth = np.empty(len(idx))
    per = max(1, chunk // len(frac))
    for s in range(0, len(idx), per):
        sl = slice(s, s + per)
        ks = kmax[sl, None] * frac[None, :]
        M = _real_spectral_stack(ab, K[sl, None], A[sl, None], Bv[sl, None], ks)
        growth[sl] = np.linalg.eigvals(M).real.max(axis=-1).max(axis=-1)
    flat = labels.ravel()
    flat[idx] = np.where(growth > SCAN_TOL, "unstable", "stable")
    return flat.reshape(KK.shape)
