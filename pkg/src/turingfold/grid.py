"""One-dimensional spectral grids with periodic or homogeneous Neumann boundaries."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

BOUNDARY_CONDITIONS = ("periodic", "neumann")


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on (0, L).

    Periodic grids use nodes ``j L / N`` and the FFT; Neumann grids use cell
    centres ``(j + 1/2) L / N`` and the orthonormal type-II cosine transform,
    which is the even extension of the field and therefore satisfies
    homogeneous Neumann conditions for every even derivative.
    """

    L: float
    N: int
    bc: str = "periodic"

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"domain length must be positive, got {self.L}")
        if int(self.N) != self.N or self.N < 16:
            raise ValueError(f"grid needs at least 16 points, got {self.N}")
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ValueError(f"unknown boundary condition {self.bc!r}")

    @property
    def h(self) -> float:
        return self.L / self.N

    @cached_property
    def x(self) -> np.ndarray:
        j = np.arange(self.N)
        if self.bc == "periodic":
            return j * self.h
        return (j + 0.5) * self.h

    @cached_property
    def k(self) -> np.ndarray:
        """Wavenumbers matching the coefficient layout of :meth:`forward`."""
        if self.bc == "periodic":
            return 2 * np.pi * np.fft.fftfreq(self.N, d=self.h)
        return np.pi * np.arange(self.N) / self.L

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule: keep modes whose index is below 2/3 of the Nyquist index."""
        if self.bc == "periodic":
            idx = np.abs(np.fft.fftfreq(self.N) * self.N)
            return idx < self.N / 3
        return np.arange(self.N) < 2 * self.N / 3

    def forward(self, u: np.ndarray) -> np.ndarray:
        if self.bc == "periodic":
            return np.fft.fft(u, axis=-1)
        return sfft.dct(u, type=2, norm="ortho", axis=-1)

    def inverse(self, uh: np.ndarray) -> np.ndarray:
        if self.bc == "periodic":
            return np.fft.ifft(uh, axis=-1)
        return sfft.idct(uh, type=2, norm="ortho", axis=-1)

    def inverse_real(self, uh: np.ndarray) -> np.ndarray:
        return np.real(self.inverse(uh))

    # real-field transforms (half spectrum for periodic grids) used by the solvers
    @cached_property
    def real_k(self) -> np.ndarray:
        if self.bc == "periodic":
            return 2 * np.pi * np.fft.rfftfreq(self.N, d=self.h)
        return self.k

    @cached_property
    def real_mask(self) -> np.ndarray:
        if self.bc == "periodic":
            return np.arange(self.N // 2 + 1) < self.N / 3
        return self.dealias_mask

    def real_forward(self, u: np.ndarray) -> np.ndarray:
        if self.bc == "periodic":
            return np.fft.rfft(u, axis=-1)
        return sfft.dct(u, type=2, norm="ortho", axis=-1)

    def real_inverse(self, uh: np.ndarray) -> np.ndarray:
        if self.bc == "periodic":
            return np.fft.irfft(uh, n=self.N, axis=-1)
        return sfft.idct(uh, type=2, norm="ortho", axis=-1)

    def even_derivative(self, u: np.ndarray, order: int) -> np.ndarray:
        """Spectral ``d^order u / dx^order`` for even ``order`` of a real field."""
        if order % 2:
            raise ValueError("only even derivatives are supported")
        if order == 0:
            return np.array(u, dtype=float)
        return self.inverse_real((-self.k**2) ** (order // 2) * self.forward(u))

    def mean(self, u: np.ndarray) -> float:
        return float(np.mean(u))

    def l2_norm(self, u: np.ndarray) -> float:
        """Root-mean-square value, i.e. the L2 norm divided by sqrt(L)."""
        return float(np.sqrt(np.mean(np.abs(u) ** 2)))

    def to_dict(self) -> dict:
        return {"L": float(self.L), "N": int(self.N), "bc": self.bc}
