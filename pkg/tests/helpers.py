"""Shared builders for the test-suite."""
import numpy as np

from turingfold.models import GeneralScalarModel, PolynomialReaction


def random_scalar_model(rng):
    """Random sixth-order scalar model of the example's shape.

    The quadratic reaction coefficient, the fourth-order coefficient and the
    nonlinear derivative couplings are drawn at random; the fold stays at
    ``u = 1`` only for the unperturbed reaction, so the locator has to work.
    """
    q = rng.uniform(1.5, 2.5)
    reaction = PolynomialReaction(((1, 1, 1.0), (2, 0, q), (3, 0, -1.0)))
    return GeneralScalarModel(
        m=3, a=(0.0, rng.uniform(1.5, 2.5), 1.0), a_tilde=(-1.0, 0.0, 0.0),
        b={(1, 1): rng.uniform(-3.0, 5.0)}, reaction=reaction,
        c=(rng.uniform(-0.6, 0.6), rng.uniform(-0.3, 0.3), 0.0),
    )


def fold_seed(model):
    """Fold of ``mu U + q U^2 - U^3``: ``u = q/2``, ``mu = -q^2/4`` (independent of nu)."""
    q = dict(((i, j), c) for i, j, c in model.reaction.terms)[(2, 0)]
    return q / 2, -q * q / 4


def nu_seed(model, u):
    """Rough nu of the Turing point: ``-(nu + c1 u) k^2 + a2' k^4 - k^6`` touches zero when ``nu + c1 u = a2'^2/4``."""
    a2 = model.a[1] + model.c[1] * u
    return 0.95 * (a2 * a2 / 4 - model.c[0] * u)


def etdrk4_errors(dts, t_end=2.0):
    """Final-time errors of ETDRK4 on a stiff diagonal test problem, against a fine reference."""
    from turingfold.fieldsolver import ETDRK4

    L = np.array([-1.0, -20.0, -0.1, 0.5])

    def N(v, t):
        return -0.5 * v * v + np.cos(t) * np.roll(v, 1)

    def run(dt):
        integ = ETDRK4(L, dt, N)
        v = np.array([1.0, 0.5, -0.3, 0.2])
        n = int(round(t_end / dt))
        for i in range(n):
            v = integ.step(v, i * dt)
        return v

    ref = run(min(dts) / 16)
    return [float(np.max(np.abs(run(dt) - ref))) for dt in dts]


def observed_orders(hs, errs):
    return [float(np.log(errs[i] / errs[i + 1]) / np.log(hs[i] / hs[i + 1])) for i in range(len(hs) - 1)]
