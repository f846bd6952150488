"""Model catalog and linear analysis of homogeneous states.

Three families are supported:

* :class:`ScalarSixthOrder` -- the sixth-order scalar example
  ``mu U + 2U^2 - U^3 + nu U'' + 2 U'''' + U'''''' + eta (U'')^2 + gamma U U''``;
* :class:`GeneralScalarModel` -- the 2m-order scalar family with linear terms
  ``(a_j - nu a~_j) d^{2j}U``, quadratic terms ``b_jl d^{2j}U d^{2l}U`` and
  (optionally) terms ``c_j U d^{2j}U`` that make the dispersion depend on ``u``;
* :class:`RDModel` -- n-component reaction-diffusion systems ``U_t = F(U) + D U_xx``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np

from .grid import Grid1D

SPECTRAL_GAP_TOL = 1e-8
ROOT_TOL = 1e-12


class ModelError(ValueError):
    """Invalid model definition or model evaluation failure."""


class DegenerateSpectrumError(ModelError):
    """The requested eigenvalue branch is not simple."""


def _falling(e: int, d: int) -> int:
    """e (e-1) ... (e-d+1): the coefficient produced by d derivatives of x^e."""
    if d > e:
        return 0
    return math.perm(e, d)


def _fd_step(order: int, x: float) -> float:
    base = {1: 1e-6, 2: 1e-4}.get(order, 1e-3)
    return base * max(1.0, abs(x))


# ---------------------------------------------------------------------------
# scalar reactions


class ScalarReaction:
    """Scalar reaction F(u; mu); subclasses provide :meth:`derivative`."""

    def derivative(self, u, mu, du: int = 0, dmu: int = 0):
        raise NotImplementedError

    def __call__(self, u, mu):
        return self.derivative(u, mu)

    def F_u(self, u, mu):
        return self.derivative(u, mu, 1, 0)

    def F_uu(self, u, mu):
        return self.derivative(u, mu, 2, 0)

    def F_uuu(self, u, mu):
        return self.derivative(u, mu, 3, 0)

    def F_mu(self, u, mu):
        return self.derivative(u, mu, 0, 1)

    def F_umu(self, u, mu):
        return self.derivative(u, mu, 1, 1)

    def polynomial_in_u(self, mu: float) -> np.ndarray | None:
        """Coefficients (highest power first) if F is a polynomial in u, else None."""
        return None


@dataclass(frozen=True)
class PolynomialReaction(ScalarReaction):
    """``F(u; mu) = sum coef * u**i * mu**j`` over ``terms = ((i, j, coef), ...)``."""

    terms: tuple[tuple[int, int, float], ...]

    def derivative(self, u, mu, du: int = 0, dmu: int = 0):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        for i, j, c in self.terms:
            f = _falling(i, du) * _falling(j, dmu)
            if f:
                out = out + c * f * u ** (i - du) * mu ** (j - dmu)
        return out if out.ndim else float(out)

    def polynomial_in_u(self, mu: float) -> np.ndarray:
        deg = max(i for i, _, _ in self.terms)
        coeffs = np.zeros(deg + 1)
        for i, j, c in self.terms:
            coeffs[deg - i] += c * mu**j
        return coeffs

    def to_dict(self) -> dict:
        return {"kind": "polynomial", "terms": [[int(i), int(j), float(c)] for i, j, c in self.terms]}


class CallableReaction(ScalarReaction):
    """Wraps a user function ``f(u, mu)``.

    Analytic derivatives may be supplied as ``oracles[(du, dmu)] = callable``;
    any missing one falls back to central finite differences.
    """

    def __init__(self, func: Callable, oracles: Mapping[tuple[int, int], Callable] | None = None):
        self.func = func
        self.oracles = dict(oracles or {})

    def derivative(self, u, mu, du: int = 0, dmu: int = 0):
        if (du, dmu) in self.oracles:
            return self.oracles[(du, dmu)](u, mu)
        if du == 0 and dmu == 0:
            return self.func(u, mu)
        if du > 0:
            h = _fd_step(du + dmu, float(np.max(np.abs(u))))
            return (self.derivative(u + h, mu, du - 1, dmu) - self.derivative(u - h, mu, du - 1, dmu)) / (2 * h)
        h = _fd_step(dmu, float(mu))
        return (self.derivative(u, mu + h, du, dmu - 1) - self.derivative(u, mu - h, du, dmu - 1)) / (2 * h)


EXAMPLE_REACTION = PolynomialReaction(((1, 1, 1.0), (2, 0, 2.0), (3, 0, -1.0)))


# ---------------------------------------------------------------------------
# scalar models


@dataclass(frozen=True)
class GeneralScalarModel:
    """Scalar 2m-order model.

    ``a``, ``a_tilde`` and ``c`` are indexed by j = 1..m (stored 0-based);
    ``b`` maps ``(j, l)`` with ``1 <= j <= l <= (m-1)//2`` to coefficients.
    ``nu_interval`` optionally declares the admissible (well-posed) range of nu.
    """

    m: int
    a: tuple[float, ...]
    a_tilde: tuple[float, ...]
    b: Mapping[tuple[int, int], float] = field(default_factory=dict)
    reaction: ScalarReaction = EXAMPLE_REACTION
    c: tuple[float, ...] | None = None
    mu: float = 0.0
    nu: float = 0.0
    nu_interval: tuple[float, float] | None = None

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 3:
            raise ModelError("the scalar family needs m >= 3 (at least sixth order)")
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "a_tilde", tuple(float(v) for v in self.a_tilde))
        c = (0.0,) * self.m if self.c is None else tuple(float(v) for v in self.c)
        object.__setattr__(self, "c", c)
        if len(self.a) != self.m or len(self.a_tilde) != self.m or len(c) != self.m:
            raise ModelError("a, a_tilde and c must all have length m")
        top = (self.m - 1) // 2
        b = {}
        for key, val in dict(self.b).items():
            j, l = (int(v) for v in key)
            if not 1 <= j <= l <= top:
                raise ModelError(f"b index {(j, l)} outside 1 <= j <= l <= {top}")
            b[(j, l)] = float(val)
        object.__setattr__(self, "b", b)
        if self.nu_interval is not None:
            lo, hi = self.nu_interval
            for nu in (lo, hi):
                if not self.well_posed(nu):
                    raise ModelError(f"leading coefficient has the wrong sign at nu = {nu}")

    # -- parameters -------------------------------------------------------
    def with_params(self, **kw) -> "GeneralScalarModel":
        return replace(self, **kw)

    def well_posed(self, nu: float) -> bool:
        lead = self.a[-1] - nu * self.a_tilde[-1]
        return lead > 0 if self.m % 2 else lead < 0

    # -- symbols ----------------------------------------------------------
    def _powers(self, k):
        q = -np.asarray(k, dtype=float) ** 2
        return [q**j for j in range(1, self.m + 1)]

    def linear_coefficients(self, nu: float, u: float = 0.0) -> np.ndarray:
        """Coefficient of d^{2j}U in the linearization about the constant state u."""
        return np.array([a - nu * at + c * u for a, at, c in zip(self.a, self.a_tilde, self.c)])

    def G(self, k, nu: float, u: float = 0.0):
        """Dispersion symbol of the spatial terms: ``sum_j coef_j (-k^2)^j``."""
        return self._poly_k(self.linear_coefficients(nu, u), k, 0)

    def _poly_k(self, coef, k, dk: int):
        # d^dk/dk^dk of sum_j coef_j (-1)^j k^{2j}
        k = np.asarray(k, dtype=float)
        out = np.zeros_like(k)
        for j, cj in enumerate(coef, start=1):
            f = _falling(2 * j, dk)
            if f and cj:
                out = out + cj * (-1) ** j * f * k ** (2 * j - dk)
        return out if out.ndim else float(out)

    def G_k(self, k, nu, u=0.0, order: int = 1):
        return self._poly_k(self.linear_coefficients(nu, u), k, order)

    def G_nu(self, k, order_k: int = 0):
        return self._poly_k([-v for v in self.a_tilde], k, order_k)

    def G_u(self, k, order_k: int = 0):
        return self._poly_k(self.c, k, order_k)

    def P(self, k1, k2) -> float:
        """``2 sum_{j<=l} b_jl (-k1^2)^j (-k2^2)^l`` as written for the b-table."""
        return 2.0 * sum(v * (-k1 * k1) ** j * (-k2 * k2) ** l for (j, l), v in self.b.items())

    def P_sym(self, k1, k2) -> float:
        """Symmetrized version of :meth:`P`; equal to it whenever k1 = k2."""
        return sum(v * ((-k1 * k1) ** j * (-k2 * k2) ** l + (-k2 * k2) ** j * (-k1 * k1) ** l)
                   for (j, l), v in self.b.items())

    def quadratic_interaction(self, k1, k2, u: float, mu: float) -> float:
        """Coefficient of ``a b e^{i(k1+k2)x}`` in the quadratic part of the
        right-hand side evaluated on ``a e^{i k1 x} + b e^{i k2 x}``."""
        cs = sum(cj * ((-k1 * k1) ** j + (-k2 * k2) ** j) for j, cj in enumerate(self.c, start=1))
        return float(self.reaction.F_uu(u, mu)) + self.P_sym(k1, k2) + cs

    def omega(self, u: float, k, mu: float, nu: float):
        return self.reaction.F_u(u, mu) + self.G(k, nu, u)

    # -- field evaluation -------------------------------------------------
    def rhs(self, U: np.ndarray, grid: Grid1D, mu: float | None = None, nu: float | None = None) -> np.ndarray:
        mu = self.mu if mu is None else mu
        nu = self.nu if nu is None else nu
        U = np.asarray(U, dtype=float)
        derivs = {j: grid.even_derivative(U, 2 * j) for j in range(1, self.m + 1)}
        out = np.asarray(self.reaction(U, mu), dtype=float)
        if not np.all(np.isfinite(out)):
            raise ModelError("reaction term returned non-finite values")
        for j in range(1, self.m + 1):
            coef = self.a[j - 1] - nu * self.a_tilde[j - 1]
            out = out + coef * derivs[j]
            if self.c[j - 1]:
                out = out + self.c[j - 1] * U * derivs[j]
        for (j, l), v in self.b.items():
            out = out + v * derivs[j] * derivs[l]
        return out

    def to_dict(self) -> dict:
        react = self.reaction.to_dict() if hasattr(self.reaction, "to_dict") else {"kind": "callable"}
        return {
            "type": "scalar_general", "m": self.m, "a": list(self.a), "a_tilde": list(self.a_tilde),
            "b": [[j, l, v] for (j, l), v in sorted(self.b.items())], "c": list(self.c),
            "reaction": react, "params": {"mu": self.mu, "nu": self.nu},
        }


@dataclass(frozen=True)
class ScalarSixthOrder:
    """Sixth-order scalar example; ``gamma = 0`` gives the base model."""

    mu: float = -1.0
    nu: float = 1.0
    eta: float = 2.0
    gamma: float = 0.0

    def with_params(self, **kw) -> "ScalarSixthOrder":
        return replace(self, **kw)

    def to_general(self) -> GeneralScalarModel:
        return GeneralScalarModel(
            m=3, a=(0.0, 2.0, 1.0), a_tilde=(-1.0, 0.0, 0.0), b={(1, 1): self.eta},
            reaction=EXAMPLE_REACTION, c=(self.gamma, 0.0, 0.0), mu=self.mu, nu=self.nu,
        )

    def rhs(self, U, grid, mu=None, nu=None):
        mu = self.mu if mu is None else mu
        nu = self.nu if nu is None else nu
        U = np.asarray(U, dtype=float)
        uh = grid.forward(U)
        k2 = grid.k**2
        lin = grid.inverse_real((-nu * k2 + 2 * k2**2 - k2**3) * uh)
        uxx = grid.inverse_real(-k2 * uh)
        return mu * U + 2 * U**2 - U**3 + lin + self.eta * uxx**2 + self.gamma * U * uxx

    def to_dict(self) -> dict:
        return {"type": "scalar6", "params": {"mu": self.mu, "nu": self.nu, "eta": self.eta, "gamma": self.gamma}}


ScalarModel = Union[ScalarSixthOrder, GeneralScalarModel]


def as_general(model: ScalarModel) -> GeneralScalarModel:
    if isinstance(model, ScalarSixthOrder):
        return model.to_general()
    if isinstance(model, GeneralScalarModel):
        return model
    raise TypeError(f"not a scalar model: {type(model).__name__}")


# ---------------------------------------------------------------------------
# vector fields and reaction-diffusion systems


class VectorField:
    """``F(U; mu, nu)`` with ``n`` components.

    :meth:`partial` returns mixed partial derivatives; the default uses nested
    central differences and subclasses override it with analytic values.
    Derivative orders are given as a length ``n + 2`` multi-index over
    ``(u_1, ..., u_n, mu, nu)``.
    """

    n: int

    def value(self, u, mu, nu):
        raise NotImplementedError

    def partial(self, u, mu, nu, orders: Sequence[int]):
        orders = list(orders)
        if not any(orders):
            return self.value(u, mu, nu)
        idx = next(i for i, o in enumerate(orders) if o)
        orders[idx] -= 1
        total = sum(orders) + 1
        u = np.asarray(u, dtype=float)
        if idx < self.n:
            h = _fd_step(total, float(np.max(np.abs(u[idx]))))
            up, um = u.copy(), u.copy()
            up[idx] = up[idx] + h
            um[idx] = um[idx] - h
            return (self.partial(up, mu, nu, orders) - self.partial(um, mu, nu, orders)) / (2 * h)
        if idx == self.n:
            h = _fd_step(total, mu)
            return (self.partial(u, mu + h, nu, orders) - self.partial(u, mu - h, nu, orders)) / (2 * h)
        h = _fd_step(total, nu)
        return (self.partial(u, mu, nu + h, orders) - self.partial(u, mu, nu - h, orders)) / (2 * h)


@dataclass(frozen=True)
class PolynomialField(VectorField):
    """Polynomial vector field.

    ``terms`` holds ``(component, coef, exponents)`` where ``exponents`` has
    length ``n + 2`` (powers of ``u_1..u_n, mu, nu``).
    """

    n: int
    terms: tuple[tuple[int, float, tuple[int, ...]], ...]

    def __post_init__(self):
        clean = []
        for comp, coef, exps in self.terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.n + 2 or not 0 <= comp < self.n or min(exps) < 0:
                raise ModelError(f"malformed polynomial term {(comp, coef, exps)}")
            clean.append((int(comp), float(coef), exps))
        object.__setattr__(self, "terms", tuple(clean))

    def value(self, u, mu, nu):
        return self.partial(u, mu, nu, (0,) * (self.n + 2))

    def partial(self, u, mu, nu, orders):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape)
        variables = list(u) + [mu, nu]
        for comp, coef, exps in self.terms:
            f = coef
            for e, o in zip(exps, orders):
                f *= _falling(e, o)
                if not f:
                    break
            if not f:
                continue
            val = f
            for var, e, o in zip(variables, exps, orders):
                if e - o:
                    val = val * var ** (e - o)
            out[comp] = out[comp] + val
        return out

    def to_dict(self) -> dict:
        return {"kind": "polynomial", "terms": [[c, v, list(e)] for c, v, e in self.terms]}


class CallableField(VectorField):
    """User-supplied ``f(u, mu, nu) -> ndarray``; derivatives by finite differences."""

    def __init__(self, n: int, func: Callable):
        self.n = n
        self.func = func

    def value(self, u, mu, nu):
        return np.asarray(self.func(np.asarray(u, dtype=float), mu, nu), dtype=float)


@dataclass(frozen=True)
class RDModel:
    """``U_t = F(U; mu, nu) + D U_xx`` with diagonal positive ``D``."""

    n: int
    D: tuple[float, ...]
    field: VectorField
    mu: float = 0.0
    nu: float = 0.0
    name: str = "rd"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ModelError("component count must be a positive integer")
        D = tuple(float(v) for v in self.D)
        if len(D) != self.n:
            raise ModelError("D must have n entries")
        if min(D) <= 0:
            raise ModelError("diffusion coefficients must be strictly positive")
        if self.field.n != self.n:
            raise ModelError("vector field dimension does not match n")
        object.__setattr__(self, "D", D)

    def with_params(self, **kw) -> "RDModel":
        return replace(self, **kw)

    @property
    def Dmat(self) -> np.ndarray:
        return np.diag(self.D)

    def _unit(self, i: int, extra=(0, 0)) -> list[int]:
        o = [0] * self.n + list(extra)
        if i is not None:
            o[i] += 1
        return o

    def F(self, u, mu, nu):
        return self.field.value(u, mu, nu)

    def _jac(self, u, mu, nu, extra):
        cols = [self.field.partial(u, mu, nu, self._unit(i, extra)) for i in range(self.n)]
        return np.column_stack(cols)

    def F_u(self, u, mu, nu):
        return self._jac(u, mu, nu, (0, 0))

    def F_umu(self, u, mu, nu):
        return self._jac(u, mu, nu, (1, 0))

    def F_unu(self, u, mu, nu):
        return self._jac(u, mu, nu, (0, 1))

    def F_mu(self, u, mu, nu):
        return self.field.partial(u, mu, nu, self._unit(None, (1, 0)))

    def F_nu(self, u, mu, nu):
        return self.field.partial(u, mu, nu, self._unit(None, (0, 1)))

    def F_mumu(self, u, mu, nu):
        return self.field.partial(u, mu, nu, self._unit(None, (2, 0)))

    def F_munu(self, u, mu, nu):
        return self.field.partial(u, mu, nu, self._unit(None, (1, 1)))

    def F_nunu(self, u, mu, nu):
        return self.field.partial(u, mu, nu, self._unit(None, (0, 2)))

    def hessian(self, u, mu, nu) -> np.ndarray:
        """``H[i, j, l] = d^2 F_i / du_j du_l``."""
        H = np.zeros((self.n, self.n, self.n))
        for j in range(self.n):
            for l in range(j, self.n):
                o = [0] * (self.n + 2)
                o[j] += 1
                o[l] += 1
                H[:, j, l] = H[:, l, j] = self.field.partial(u, mu, nu, o)
        return H

    def third_derivative(self, u, mu, nu) -> np.ndarray:
        T = np.zeros((self.n,) * 4)
        for j in range(self.n):
            for l in range(self.n):
                for m in range(self.n):
                    o = [0] * (self.n + 2)
                    o[j] += 1
                    o[l] += 1
                    o[m] += 1
                    T[:, j, l, m] = self.field.partial(u, mu, nu, o)
        return T

    def F_uu(self, u, mu, nu, v, w):
        """Bilinear Hessian action ``F_uu(v, w)`` (complex vectors allowed)."""
        return np.einsum("ijl,j,l->i", self.hessian(u, mu, nu), v, w)

    def F_uuu(self, u, mu, nu, v, w, z):
        return np.einsum("ijlm,j,l,m->i", self.third_derivative(u, mu, nu), v, w, z)

    def T(self, u, k, mu, nu) -> np.ndarray:
        return self.F_u(u, mu, nu) - k**2 * self.Dmat

    def rhs(self, U, grid: Grid1D, mu=None, nu=None):
        mu = self.mu if mu is None else mu
        nu = self.nu if nu is None else nu
        U = np.asarray(U, dtype=float)
        out = self.field.value(U, mu, nu)
        if not np.all(np.isfinite(out)):
            raise ModelError("reaction term returned non-finite values")
        lap = grid.even_derivative(U, 2)
        return out + np.asarray(self.D)[:, None] * lap

    def to_dict(self) -> dict:
        react = self.field.to_dict() if hasattr(self.field, "to_dict") else {"kind": "callable"}
        return {"type": "rd", "n": self.n, "D": list(self.D), "reaction": react,
                "params": {"mu": self.mu, "nu": self.nu}, "name": self.name}


ModelSpec = Union[ScalarSixthOrder, GeneralScalarModel, RDModel]


def is_rd(model) -> bool:
    return isinstance(model, RDModel)


# ---------------------------------------------------------------------------
# operations


def eval_rhs(model: ModelSpec, field_values: np.ndarray, grid: Grid1D, mu=None, nu=None) -> np.ndarray:
    """Pointwise right-hand side ``U_t`` on ``grid``."""
    arr = np.asarray(field_values, dtype=float)
    if arr.shape[-1] != grid.N:
        raise ModelError(f"field has {arr.shape[-1]} points but the grid has {grid.N}")
    if is_rd(model):
        if arr.ndim != 2 or arr.shape[0] != model.n:
            raise ModelError(f"expected an array of shape ({model.n}, {grid.N})")
    elif arr.ndim != 1:
        raise ModelError("scalar models take a one-dimensional field")
    return model.rhs(arr, grid, mu, nu)


@dataclass(frozen=True)
class HomogeneousState:
    u: np.ndarray
    ode_stable: bool
    residual: float

    @property
    def value(self):
        return float(self.u[0]) if self.u.size == 1 else self.u


def _reaction_vector(model, u, mu, nu):
    if is_rd(model):
        return model.F(u, mu, nu)
    return np.atleast_1d(as_general(model).reaction(u[0], mu))


def _reaction_jacobian(model, u, mu, nu):
    if is_rd(model):
        return model.F_u(u, mu, nu)
    return np.array([[as_general(model).reaction.F_u(u[0], mu)]])


def _deflated_newton(model, mu, nu, seed, roots, tol=ROOT_TOL, maxit=200):
    u = np.array(seed, dtype=float)
    for _ in range(maxit):
        F = _reaction_vector(model, u, mu, nu)
        if np.linalg.norm(F) < tol:
            return u
        J = _reaction_jacobian(model, u, mu, nu)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -F, rcond=None)[0]
        # deflation operator M(u) = prod (1/|u - r|^2 + 1); Newton step of M F
        # equals the plain step divided by (1 - <grad log M, step>)
        g = np.zeros_like(u)
        for r in roots:
            diff = u - r
            dd = diff @ diff
            g += -2 * diff / (dd * dd) / (1 / dd + 1)
        denom = 1 - g @ step
        if abs(denom) > 1e-12:
            step = step / denom
        lam = 1.0
        f0 = np.linalg.norm(F)
        while lam > 1e-4:
            trial = u + lam * step
            if np.linalg.norm(_reaction_vector(model, trial, mu, nu)) < (1 - 0.25 * lam) * f0 or lam < 2e-4:
                break
            lam *= 0.5
        u = u + lam * step
    return u if np.linalg.norm(_reaction_vector(model, u, mu, nu)) < tol else None


def homogeneous_states(model: ModelSpec, mu: float, nu: float | None = None,
                       seeds: Iterable | None = None) -> list[HomogeneousState]:
    """Spatially homogeneous equilibria at ``(mu, nu)``.

    For scalar polynomial reactions all real roots are returned (with
    multiplicity). Otherwise damped Newton with deflation is run from ``seeds``.
    A state is flagged ``ode_stable`` when every eigenvalue of the reaction
    Jacobian has negative real part.
    """
    nu = model.nu if nu is None else nu
    found: list[np.ndarray] = []
    if not is_rd(model):
        gm = as_general(model)
        poly = gm.reaction.polynomial_in_u(mu)
        if poly is not None and seeds is None:
            roots = np.roots(np.trim_zeros(poly, "f"))
            for r in sorted(roots.real[np.abs(roots.imag) < 1e-7]):
                # polish each root with Newton on the polynomial
                x = float(r)
                for _ in range(50):
                    fx, dfx = gm.reaction(x, mu), gm.reaction.F_u(x, mu)
                    if abs(fx) < 1e-15 or dfx == 0:
                        break
                    x -= fx / dfx
                found.append(np.array([x]))
    if not found:
        if seeds is None:
            raise ModelError("no seeds given for the homogeneous-state search")
        for s in seeds:
            r = _deflated_newton(model, mu, nu, np.atleast_1d(np.asarray(s, dtype=float)), found)
            if r is not None:
                found.append(r)
        if not found:
            raise ModelError("no homogeneous state found from the provided seeds")
    out = []
    for u in found:
        res = float(np.linalg.norm(_reaction_vector(model, u, mu, nu)))
        ev = np.linalg.eigvals(_reaction_jacobian(model, u, mu, nu))
        out.append(HomogeneousState(u=u, ode_stable=bool(np.all(ev.real < 0)), residual=res))
    return out


@dataclass(frozen=True)
class DispersionSample:
    k: float
    omega: tuple[complex, ...]

    @property
    def leading(self) -> complex:
        return self.omega[0]


def _sorted_eigs(M):
    ev, V = np.linalg.eig(M)
    order = np.argsort(-ev.real, kind="stable")
    return ev[order], V[:, order]


def dispersion(model: ModelSpec, u, k: float, mu: float, nu: float) -> DispersionSample:
    """Growth rates of ``e^{ikx}`` perturbations of the homogeneous state ``u``."""
    if is_rd(model):
        ev, _ = _sorted_eigs(model.T(np.asarray(u, dtype=float), k, mu, nu))
        return DispersionSample(k=float(k), omega=tuple(complex(v) for v in ev))
    gm = as_general(model)
    u0 = float(np.atleast_1d(u)[0])
    return DispersionSample(k=float(k), omega=(float(gm.omega(u0, k, mu, nu)),))


def dispersion_branches(model: RDModel, u, ks: Sequence[float], mu: float, nu: float) -> np.ndarray:
    """Eigenvalue curves over ``ks`` matched by maximal eigenvector overlap.

    Row ``i`` holds the eigenvalues at ``ks[i]``; column ``j`` follows one
    continuous branch, starting from the descending-real-part ordering at ``ks[0]``.
    """
    u = np.asarray(u, dtype=float)
    ev, V = _sorted_eigs(model.T(u, ks[0], mu, nu))
    out = [ev]
    for k in ks[1:]:
        ev_new, V_new = np.linalg.eig(model.T(u, k, mu, nu))
        V_new = V_new / np.linalg.norm(V_new, axis=0)
        overlap = np.abs(V.conj().T @ V_new)
        perm = np.full(len(ev), -1)
        taken = set()
        for i in np.argsort(-overlap.max(axis=1)):
            for j in np.argsort(-overlap[i]):
                if j not in taken:
                    perm[i] = j
                    taken.add(j)
                    break
        ev, V = ev_new[perm], V_new[:, perm]
        out.append(ev)
    return np.array(out)


def characteristic_polynomial(model: RDModel, lam, u, mu, nu, k) -> complex:
    """``P(lam; u, mu, nu, k) = det(F_u - k^2 D - lam I)``."""
    M = model.T(np.asarray(u, dtype=float), k, mu, nu) - lam * np.eye(model.n)
    return np.linalg.det(M)


def _det_derivative(M: np.ndarray, d1: np.ndarray, d2: np.ndarray | None = None,
                    d12: np.ndarray | None = None) -> complex:
    """Exact first or second directional derivative of ``det`` using column multilinearity."""
    n = M.shape[0]
    if d2 is None:
        total = 0.0
        for i in range(n):
            A = M.copy()
            A[:, i] = d1[:, i]
            total += np.linalg.det(A)
        return total
    total = 0.0
    for i in range(n):
        for j in range(n):
            A = M.copy()
            if i == j:
                if d12 is None:
                    continue
                A[:, i] = d12[:, i]
            else:
                A[:, i] = d1[:, i]
                A[:, j] = d2[:, j]
            total += np.linalg.det(A)
    return total


PARTIAL_NAMES = ("P_lambda", "P_mu", "P_nu", "P_u", "P_k", "P_kk", "P_kmu", "P_knu", "P_ku",
                 "Q_u", "Q_mu", "Q_nu", "P_lambdalambda", "P_klambda")


def char_poly_partials(model: RDModel, u, mu: float, nu: float, k: float, lam: float = 0.0,
                       method: str = "fd") -> dict:
    """Partials of ``P`` (and of ``Q = P|_{k=0}``) at the given point.

    ``method="fd"`` uses central differences of the determinant;
    ``method="exact"`` uses multilinearity of the determinant together with
    the model's derivative oracles.
    """
    u = np.asarray(u, dtype=float)
    n = model.n
    if method == "fd":
        def P(lam_=lam, u_=u, mu_=mu, nu_=nu, k_=k):
            return characteristic_polynomial(model, lam_, u_, mu_, nu_, k_)

        def d1(f, x, h):
            return (f(x + h) - f(x - h)) / (2 * h)

        def h1(x):
            return 1e-6 * max(1.0, abs(x))

        def h2(x):
            return 1e-4 * max(1.0, abs(x))

        out = {
            "P_lambda": d1(lambda t: P(lam_=t), lam, h1(lam)),
            "P_mu": d1(lambda t: P(mu_=t), mu, h1(mu)),
            "P_nu": d1(lambda t: P(nu_=t), nu, h1(nu)),
            "P_k": d1(lambda t: P(k_=t), k, h1(k)),
        }
        hk = h2(k)
        out["P_kk"] = (P(k_=k + hk) - 2 * P() + P(k_=k - hk)) / hk**2
        hl = h2(lam)
        out["P_lambdalambda"] = (P(lam_=lam + hl) - 2 * P() + P(lam_=lam - hl)) / hl**2

        def mixed(f, h_a, h_b):
            return (f(h_a, h_b) - f(h_a, -h_b) - f(-h_a, h_b) + f(-h_a, -h_b)) / (4 * h_a * h_b)

        out["P_kmu"] = mixed(lambda a, b: P(k_=k + a, mu_=mu + b), hk, h2(mu))
        out["P_knu"] = mixed(lambda a, b: P(k_=k + a, nu_=nu + b), hk, h2(nu))
        out["P_klambda"] = mixed(lambda a, b: P(k_=k + a, lam_=lam + b), hk, hl)
        P_u, P_ku, Q_u = np.zeros(n), np.zeros(n), np.zeros(n)
        for j in range(n):
            e = np.zeros(n)
            e[j] = 1.0
            hu = h1(u[j])
            P_u[j] = d1(lambda t: P(u_=u + t * e), 0.0, hu)
            Q_u[j] = d1(lambda t: P(u_=u + t * e, k_=0.0), 0.0, hu)
            hu2 = h2(u[j])
            P_ku[j] = mixed(lambda a, b: P(k_=k + a, u_=u + b * e), hk, hu2)
        out["P_u"], out["P_ku"], out["Q_u"] = P_u, P_ku, Q_u
        out["Q_mu"] = d1(lambda t: P(mu_=t, k_=0.0), mu, h1(mu))
        out["Q_nu"] = d1(lambda t: P(nu_=t, k_=0.0), nu, h1(nu))
        return {key: float(np.real(v)) if np.ndim(v) == 0 else np.real(v) for key, v in out.items()}
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    I = np.eye(n)
    Dm = model.Dmat
    H = model.hessian(u, mu, nu)
    Fumu, Funu = model.F_umu(u, mu, nu), model.F_unu(u, mu, nu)
    dT_dk = -2 * k * Dm
    dT_dkk = -2 * Dm

    def partials_at(kk):
        M = model.T(u, kk, mu, nu) - lam * I
        dk = -2 * kk * Dm
        res = {
            "P_lambda": _det_derivative(M, -I),
            "P_mu": _det_derivative(M, Fumu),
            "P_nu": _det_derivative(M, Funu),
            "P_u": np.array([_det_derivative(M, H[:, :, j]) for j in range(n)]),
            "P_k": _det_derivative(M, dk),
        }
        return M, res

    M, out = partials_at(k)
    out["P_kk"] = _det_derivative(M, dT_dk, dT_dk, dT_dkk)
    out["P_lambdalambda"] = _det_derivative(M, -I, -I, np.zeros_like(M))
    out["P_klambda"] = _det_derivative(M, dT_dk, -I, np.zeros_like(M))
    # mixed k-derivatives; second derivatives of F_u in mu/nu directions are
    # absent from dT/dk so only the cross term survives
    out["P_kmu"] = _det_derivative(M, dT_dk, Fumu, np.zeros_like(M))
    out["P_knu"] = _det_derivative(M, dT_dk, Funu, np.zeros_like(M))
    out["P_ku"] = np.array([_det_derivative(M, dT_dk, H[:, :, j], np.zeros_like(M)) for j in range(n)])
    _, q = partials_at(0.0)
    out["Q_u"], out["Q_mu"], out["Q_nu"] = q["P_u"], q["P_mu"], q["P_nu"]
    return {key: float(np.real(v)) if np.ndim(v) == 0 else np.real(v) for key, v in out.items()}


def _check_gap(ev: np.ndarray, which: int = 0):
    others = np.delete(ev, which)
    gap = float(np.min(np.abs(others - ev[which]))) if len(others) else np.inf
    if gap < SPECTRAL_GAP_TOL:
        raise DegenerateSpectrumError(f"eigenvalue is not simple: spectral gap {gap:.3e}")
    return gap


def dispersion_derivatives(model: ModelSpec, u, k: float, mu: float, nu: float,
                           which: Iterable[str] | None = None) -> dict:
    """Derivatives of the leading dispersion branch at ``k``.

    ``omega_mu`` and ``omega_nu`` are total derivatives along the homogeneous
    branch through ``u``; ``rho_kk`` is ``omega_kk`` at ``k = 0``. For RD
    models the characteristic-polynomial partials (``P_*``, ``Q_*``) are
    included as well.
    """
    out: dict = {}
    if not is_rd(model):
        gm = as_general(model)
        u0 = float(np.atleast_1d(u)[0])
        R = gm.reaction
        Fu = R.F_u(u0, mu)
        out["omega"] = float(gm.omega(u0, k, mu, nu))
        out["omega_k"] = float(gm.G_k(k, nu, u0, 1))
        out["omega_kk"] = float(gm.G_k(k, nu, u0, 2))
        out["rho_kk"] = float(gm.G_k(0.0, nu, u0, 2))
        du_dmu = -R.F_mu(u0, mu) / Fu if Fu != 0 else np.nan
        out["omega_mu"] = float(R.F_umu(u0, mu) + (R.F_uu(u0, mu) + gm.G_u(k)) * du_dmu)
        out["omega_nu"] = float(gm.G_nu(k))
        out["omega_u"] = float(R.F_uu(u0, mu) + gm.G_u(k))
    else:
        u = np.asarray(u, dtype=float)
        T = model.T(u, k, mu, nu)
        ev, _ = _sorted_eigs(T)
        _check_gap(ev)
        lam = ev[0]
        if abs(lam.imag) > SPECTRAL_GAP_TOL:
            raise DegenerateSpectrumError(f"leading eigenvalue is complex ({lam})")
        lam = float(lam.real)
        P = char_poly_partials(model, u, mu, nu, k, lam=lam)
        out.update(P)
        out["omega"] = lam
        w_k = -P["P_k"] / P["P_lambda"]
        out["omega_k"] = w_k
        out["omega_kk"] = -(P["P_kk"] + 2 * P["P_klambda"] * w_k + P["P_lambdalambda"] * w_k**2) / P["P_lambda"]
        ev0 = np.sort(np.linalg.eigvals(model.T(u, 0.0, mu, nu)).real)[::-1]
        P0 = char_poly_partials(model, u, mu, nu, 0.0, lam=float(ev0[0]))
        out["rho_kk"] = -P0["P_kk"] / P0["P_lambda"]
        Fu = model.F_u(u, mu, nu)
        try:
            u_mu = np.linalg.solve(Fu, -model.F_mu(u, mu, nu))
            u_nu = np.linalg.solve(Fu, -model.F_nu(u, mu, nu))
        except np.linalg.LinAlgError:
            u_mu = u_nu = np.full(model.n, np.nan)
        out["omega_mu"] = -(P["P_mu"] + P["P_u"] @ u_mu) / P["P_lambda"]
        out["omega_nu"] = -(P["P_nu"] + P["P_u"] @ u_nu) / P["P_lambda"]
    if which is not None:
        which = set(which)
        out = {key: v for key, v in out.items() if key in which}
    return out


# ---------------------------------------------------------------------------
# built-in reaction-diffusion models


def polynomial_rd(D, forcing, linear, linear_nu=None, quadratic=None, cubic=None,
                  name: str = "rd", mu: float = 0.0, nu: float = 0.0) -> RDModel:
    """RD model ``F = mu e + (J + nu J1) U + Q(U, U) - c_i U_i^3`` built from arrays.

    ``quadratic`` maps component ``i`` to ``{(j, l): q}`` meaning ``q U_j U_l``.
    """
    n = len(D)
    linear = np.asarray(linear, dtype=float)
    linear_nu = np.zeros((n, n)) if linear_nu is None else np.asarray(linear_nu, dtype=float)
    quadratic = quadratic or {}
    cubic = np.zeros(n) if cubic is None else np.asarray(cubic, dtype=float)

    def unit(*idx, mu_pow=0, nu_pow=0):
        e = [0] * (n + 2)
        for i in idx:
            e[i] += 1
        e[n] += mu_pow
        e[n + 1] += nu_pow
        return tuple(e)

    terms = []
    for i in range(n):
        if forcing[i]:
            terms.append((i, float(forcing[i]), unit(mu_pow=1)))
        for j in range(n):
            if linear[i, j]:
                terms.append((i, float(linear[i, j]), unit(j)))
            if linear_nu[i, j]:
                terms.append((i, float(linear_nu[i, j]), unit(j, nu_pow=1)))
        for (j, l), q in quadratic.get(i, {}).items():
            terms.append((i, float(q), unit(j, l)))
        if cubic[i]:
            terms.append((i, -float(cubic[i]), unit(i, i, i)))
    return RDModel(n, tuple(D), PolynomialField(n, tuple(terms)), mu=mu, nu=nu, name=name)


# three components with D = (1, 0.2, 5); the linear part sits close to a
# Turing-fold point at the origin with critical wavenumber near 1
_TF3_LINEAR = (
    (-1.38, 1.04, 0.24),
    (-1.08, 0.68, 0.46),
    (0.52, -0.39, -0.09),
)


def turing_fold_3(mu: float = 0.0, nu: float = 0.0) -> RDModel:
    return polynomial_rd(
        D=(1.0, 0.2, 5.0),
        forcing=(0.0, 0.0, 1.0),
        linear=_TF3_LINEAR,
        linear_nu=((0.0, 0.0, 1.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
        quadratic={0: {(0, 0): -0.5, (1, 1): 0.5}, 1: {(0, 2): -0.5}, 2: {(2, 2): -1.0}},
        cubic=(1.0, 1.0, 1.0),
        name="turing_fold_3", mu=mu, nu=nu,
    )


BUILTIN_RD = {"turing_fold_3": turing_fold_3}
