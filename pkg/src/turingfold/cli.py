"""Command-line interface: ``turingfold <command> [options]``.

Every command writes its outputs plus ``manifest.json`` into ``--out``.
A manifest (or any JSON file with a ``params`` map) can be passed back
through ``--config``; flags given on the command line take precedence.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from . import absystem, experiments, io
from .bifurcation import BifurcationError, TuringFoldReport, ab_coefficients, locate_turing_fold
from .fieldsolver import ABState, ScalarState, integrate_ab, integrate_scalar
from .grid import Grid1D
from .models import ModelError

EXIT_AUDIT = 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def parse_range(text: str, with_step: bool = False):
    """``a:b`` -> (a, b); ``a:b:step`` -> inclusive list of values."""
    try:
        parts = [float(p) for p in text.split(":")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from None
    if with_step:
        if len(parts) == 1:
            return parts
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
        n = int(round((parts[1] - parts[0]) / parts[2])) + 1
        return [round(parts[0] + i * parts[2], 12) for i in range(n)]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}")
    return tuple(parts)


def parse_floats(text: str):
    try:
        return [float(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def parse_params(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects key=value, got {item!r}")
        try:
            out[key] = float(val)
        except ValueError:
            raise UsageError(f"--param {key}: {val!r} is not a number") from None
    return out


def resolve_model_path(name: str) -> Path:
    """A file path, or the name of a bundled model description (``scalar6``, ``extended``, ``turing_fold_3``)."""
    path = Path(name)
    if path.exists():
        return path
    bundled = resources.files("turingfold") / "data" / f"{path.stem}.json"
    if bundled.is_file():
        return Path(str(bundled))
    raise UsageError(f"model file {name!r} not found")


def _require(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"missing required option(s) {', '.join(missing)}")


RANGE_OPTIONS = ("--K", "--R", "--deltas", "--alphas")


def _join_negative_values(argv):
    """Allow ``--K -1.2:1.2``: argparse would read the value as an option."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in RANGE_OPTIONS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def _config(args) -> dict:
    skip = {"func", "config", "command"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _finish(args, outputs, **extra):
    out = Path(args.out)
    io.write_json(out / "manifest.json", io.manifest(args.command, _config(args), outputs, **extra))


def _map(func, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


# ---------------------------------------------------------------------------
# commands


def cmd_locate(args):
    _require(args, "model")
    path = resolve_model_path(args.model)
    overrides = parse_params(args.param)
    model, data = io.load_model(path, overrides)
    seeds = {**data.get("seeds", {})}
    for key in ("nu", "mu", "k"):
        val = getattr(args, f"{key}_seed")
        if val is not None:
            seeds[key] = val
    if "nu" not in seeds or "mu" not in seeds:
        raise UsageError("locate needs nu and mu seeds (model file 'seeds' or --nu-seed/--mu-seed)")
    report = locate_turing_fold(model, seeds["nu"], seeds["mu"], k_seed=seeds.get("k"), u_seed=seeds.get("u"))
    doc = {"schema": io.SCHEMA, "model": io.model_to_dict(model), "report": report.to_dict()}
    io.write_json(Path(args.out) / "report.json", doc)
    _finish(args, ["report.json"], audit_passed=report.passed)
    print(f"mu*={io.fmt(report.mu_star)} nu*={io.fmt(report.nu_star)} k*={io.fmt(report.k_star)} "
          f"audit={'pass' if report.passed else 'FAIL ' + ','.join(report.failures)}")
    if args.strict and not report.passed:
        return EXIT_AUDIT
    return 0


def cmd_coeffs(args):
    _require(args, "report")
    doc = io.load_json(args.report)
    try:
        model = io.model_from_dict(doc["model"])
        report = TuringFoldReport.from_dict(doc["report"])
    except KeyError as exc:
        raise UsageError(f"{args.report}: not a report file (missing {exc})") from None
    coeffs = ab_coefficients(report, model)
    io.write_json(Path(args.out) / "coefficients.json", {"schema": io.SCHEMA, **coeffs.to_dict()})
    _finish(args, ["coefficients.json"])
    a, d, b = coeffs.canonical
    print(f"alpha={io.fmt(a)} d={io.fmt(d)} beta={io.fmt(b)}")
    return 0


def cmd_busse(args):
    _require(args, "alpha", "d", "beta")
    ab = absystem.CanonicalAB(args.alpha, args.d, args.beta)
    bm = absystem.busse_map(ab, args.K, args.R, (args.nK, args.nR), scan=args.scan)
    io.write_csv(Path(args.out) / "busse.csv", ["K", "R", "class", "max_growth"], bm.rows())
    _finish(args, ["busse.csv"], stable_fraction=bm.stable_fraction())
    print(f"stable fraction {bm.stable_fraction():.4f}")
    return 0


def _snapshot_rows(times, snaps, x, every: int, fields):
    for t, s in zip(times, snaps):
        vals = [f(s) for f in fields]
        for j in range(0, len(x), every):
            yield [t, x[j], *(v[j] for v in vals)]


def cmd_simulate(args):
    out = Path(args.out)
    grid = Grid1D(args.L, args.N, args.bc)
    rng = np.random.default_rng(args.seed)
    if args.system == "ab":
        ab = absystem.CanonicalAB(args.alpha, args.d, args.beta, args.R)
        wave = absystem.plane_wave(ab, args.K0)
        if wave is None:
            raise UsageError(f"no plane wave with K = {args.K0} at R = {args.R}")
        A, B = wave.fields(grid.x)
        A = A + args.noise * (rng.standard_normal(grid.N) + 1j * rng.standard_normal(grid.N))
        B = B + args.noise * rng.standard_normal(grid.N)
        res = integrate_ab(ab, ABState(A, B), grid, args.dt, args.t_end, record_every=args.record_every,
                           raise_blowup=False)
        rows = _snapshot_rows(res.times, res.snapshots, grid.x, args.stride,
                              [lambda s: s.A.real, lambda s: s.A.imag, lambda s: s.B])
        io.write_csv(out / "trajectory.csv", ["t", "x", "A_re", "A_im", "B"], rows)
        norms = [(t, float(np.sqrt(np.mean(np.abs(s.A) ** 2))), float(np.mean(s.B)))
                 for t, s in zip(res.times, res.snapshots)]
        io.write_csv(out / "norms.csv", ["t", "A_rms", "B_mean"], norms)
    else:
        if not args.model:
            raise UsageError("simulate pde needs --model")
        model, _ = io.load_model(resolve_model_path(args.model), parse_params(args.param))
        u0 = args.u0 if args.u0 is not None else 1.0
        U = u0 + args.noise * rng.standard_normal(grid.N)
        res = integrate_scalar(model, ScalarState(U), grid, args.dt, args.t_end, record_every=args.record_every,
                               raise_blowup=False)
        rows = _snapshot_rows(res.times, res.snapshots, grid.x, args.stride, [lambda s: s.U])
        io.write_csv(out / "trajectory.csv", ["t", "x", "U"], rows)
        io.write_csv(out / "norms.csv", ["t", "mu", "U_rms"], ([t, m, n] for t, (m, n) in zip(res.times, res.diagnostics)))
    _finish(args, ["trajectory.csv", "norms.csv"], blew_up=res.blew_up, message=res.message)
    print(res.message or f"finished {res.steps} steps")
    return 0


def _converge_one(job):
    K, r, eta, delta, N, dt, t_max = job
    return experiments.run_convergence(K, r, eta, [delta], N=N, dt=dt, t_max=t_max)[0]


def cmd_converge(args):
    _require(args, "K")
    jobs = [(args.K, args.r, args.eta, dl, args.N, args.dt, args.t_max) for dl in args.deltas]
    rows = _map(_converge_one, jobs, args.threads)
    ok = [row for row in rows if row.outcome == "periodic"]
    for row, e in zip(ok, experiments.pair_exponents([r.delta for r in ok], [r.norm_diff for r in ok])):
        row.exponent = e
    io.write_csv(Path(args.out) / "convergence.csv", ["delta", "norm_diff", "exponent", "converged", "outcome"],
                 ([r.delta, r.norm_diff, r.exponent, r.converged, r.outcome] for r in rows))
    _finish(args, ["convergence.csv"])
    for r in rows:
        print(f"{r.delta:.4g}  {r.norm_diff:.4g}  {r.exponent:.4f}  {r.outcome}")
    return 0


def cmd_tip(args):
    trace = experiments.run_tipping(eta=args.eta, delta=args.delta, gamma=args.gamma, mu0=args.mu0, T=args.T,
                                    L=args.L, N=args.N, dt=args.dt, noise=args.noise, seed=args.seed,
                                    mode=args.mode)
    io.write_csv(Path(args.out) / "tipping.csv", ["mu", "norm"], trace.samples)
    _finish(args, ["tipping.csv"], outcome=trace.outcome, collapse_mu=trace.collapse_mu)
    extra = f" at mu = {io.fmt(trace.collapse_mu)}" if trace.collapse_mu is not None else ""
    print(f"outcome = {trace.outcome}{extra}")
    return 0


def _regime_one(job):
    d, beta, K0, offset, alpha, N, t_max, dt, noise, seed = job
    grid = experiments.regime_grid(K0, N)
    return experiments.run_regime_scan(d, beta, K0, offset, [alpha], grid, t_max, dt, noise, seed)[0]


def cmd_regime_scan(args):
    K0 = args.K0 if args.K0 is not None else math.sqrt(0.8)
    jobs = [(args.d, args.beta, K0, args.R_offset, a, args.N, args.t_max, args.dt, args.noise, args.seed)
            for a in args.alphas]
    results = _map(_regime_one, jobs, args.threads)
    io.write_csv(Path(args.out) / "regimes.csv",
                 ["alpha", "tag", "confidence", "tail_variance", "periodic_fraction", "K_end"],
                 ([r.alpha, r.tag, r.confidence, r.tail_variance, r.periodic_fraction, r.K_end] for r in results))
    io.write_csv(Path(args.out) / "norm_traces.csv", ["alpha", "tau", "A_rms"],
                 ([r.alpha, t, n] for r in results for t, n in zip(r.times, r.norms)))
    _finish(args, ["regimes.csv", "norm_traces.csv"])
    for r in results:
        print(f"alpha={r.alpha:g}: {r.tag} ({r.confidence:.3f})")
    return 0


def cmd_gl_embed(args):
    _require(args, "model")
    model, data = io.load_model(resolve_model_path(args.model), parse_params(args.param))
    s = data.get("seeds", {})
    report = locate_turing_fold(model, s.get("nu", 0.0), s.get("mu", 0.0), k_seed=s.get("k"), u_seed=s.get("u"))
    res = experiments.run_gl_embedding(report, model, args.delta, args.R)
    io.write_csv(Path(args.out) / "gl_embedding.csv",
                 ["delta", "R", "r", "amp_ab", "amp_gl", "deviation", "landau", "omega_mu"],
                 [[res.delta, res.R, res.r, res.amp_ab, res.amp_gl, res.deviation, res.landau, res.omega_mu]])
    _finish(args, ["gl_embedding.csv"])
    print(f"AB amplitude {io.fmt(res.amp_ab)}, GL amplitude {io.fmt(res.amp_gl)}, "
          f"relative deviation {io.fmt(res.deviation)}")
    return 0


def cmd_chaos_pair(args):
    res = experiments.run_underlying_chaos(alpha=args.alpha, beta=args.beta, delta=args.delta,
                                           wavelengths=args.wavelengths, N_ab=args.N_ab, N_pde=args.N_pde,
                                           tau_max=args.tau_max, dt_ab=args.dt, dt_pde=args.dt_pde,
                                           record_every=args.record_every, noise=args.noise, seed=args.seed)
    every = args.stride

    def rows():
        for t, U, Uab in zip(res.times, res.U, res.U_ab):
            for j in range(0, len(res.x), every):
                yield [t, res.x[j], U[j], Uab[j]]

    io.write_csv(Path(args.out) / "chaos_pair.csv", ["tau", "x", "U", "U_AB"], rows())
    cols = ["amp", "amp_ab", "k", "k_ab", "shift", "rms", "rms_aligned"]
    io.write_csv(Path(args.out) / "chaos_metrics.csv", ["tau", *cols],
                 ([t, *(m[c] for c in cols)] for t, m in zip(res.times, res.metrics())))
    _finish(args, ["chaos_pair.csv", "chaos_metrics.csv"], gamma=res.gamma, eta=res.eta, blew_up=res.blew_up, message=res.message)
    print(f"gamma={io.fmt(res.gamma)} eta={io.fmt(res.eta)} d={io.fmt(res.ab.d)}"
          + (f" ({res.message})" if res.message else ""))
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="turingfold", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def command(name, func, help):
        sp = sub.add_parser(name, help=help)
        sp.set_defaults(func=func)
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--config", help="JSON config or manifest to read parameters from")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1)
        return sp

    sp = command("locate", cmd_locate, "locate the Turing-fold point of a model")
    sp.add_argument("--model")
    sp.add_argument("--param", action="append", metavar="KEY=VALUE")
    sp.add_argument("--nu-seed", type=float)
    sp.add_argument("--mu-seed", type=float)
    sp.add_argument("--k-seed", type=float)
    sp.add_argument("--strict", action="store_true", help="exit nonzero when an audit fails")

    sp = command("coeffs", cmd_coeffs, "AB-system coefficients from a report file")
    sp.add_argument("--report")

    sp = command("busse", cmd_busse, "classification raster over (K, R)")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--d", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--K", type=parse_range, default=(-1.2, 1.2))
    sp.add_argument("--R", type=parse_range, default=(-0.5, 3.0))
    sp.add_argument("--nK", type=int, default=121)
    sp.add_argument("--nR", type=int, default=121)
    sp.add_argument("--scan", action="store_true", help="also compute the maximal growth rate")

    sp = command("simulate", cmd_simulate, "integrate the AB-system or a scalar PDE")
    sp.add_argument("system", choices=("ab", "pde"))
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--d", type=float, default=0.5)
    sp.add_argument("--beta", type=float, default=8.0)
    sp.add_argument("--R", type=float, default=2.0)
    sp.add_argument("--K0", type=float, default=0.5)
    sp.add_argument("--model")
    sp.add_argument("--param", action="append", metavar="KEY=VALUE")
    sp.add_argument("--u0", type=float)
    sp.add_argument("--L", type=float, default=40 * math.pi)
    sp.add_argument("--N", type=int, default=256)
    sp.add_argument("--bc", choices=("periodic", "neumann"), default="periodic")
    sp.add_argument("--dt", type=float, default=0.05)
    sp.add_argument("--t-end", type=float, default=100.0)
    sp.add_argument("--record-every", type=float, default=10.0)
    sp.add_argument("--noise", type=float, default=1e-6)
    sp.add_argument("--stride", type=int, default=1, help="write every stride-th grid point")

    sp = command("converge", cmd_converge, "convergence table of the plane-wave approximation")
    sp.add_argument("--K", type=float)
    sp.add_argument("--r", type=float, default=4.0)
    sp.add_argument("--eta", type=float, default=2.0)
    sp.add_argument("--deltas", type=lambda s: parse_range(s, True), default=[0.02, 0.04, 0.06, 0.08, 0.1])
    sp.add_argument("--N", type=int, default=64)
    sp.add_argument("--dt", type=float, default=0.05)
    sp.add_argument("--t-max", type=float, default=10000.0)

    sp = command("tip", cmd_tip, "slow parameter ramp through the fold")
    sp.add_argument("--eta", type=float, default=2.0)
    sp.add_argument("--delta", type=float, default=0.6)
    sp.add_argument("--gamma", type=float, default=0.0)
    sp.add_argument("--mu0", type=float, default=-0.874)
    sp.add_argument("--T", type=float, default=2000.0)
    sp.add_argument("--L", type=float, default=4 * math.pi)
    sp.add_argument("--N", type=int, default=64)
    sp.add_argument("--dt", type=float, default=0.05)
    sp.add_argument("--noise", type=float, default=1e-3)
    sp.add_argument("--mode", choices=("pde", "ode"), default="pde")

    sp = command("regime-scan", cmd_regime_scan, "AB-system regimes near a marginal Turing plane wave")
    sp.add_argument("--alphas", type=parse_floats, default=[0.8, 0.7745, 0.75715, 0.7])
    sp.add_argument("--d", type=float, default=1 / 3)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--K0", type=float)
    sp.add_argument("--R-offset", type=float, default=-0.01)
    sp.add_argument("--N", type=int, default=2048)
    sp.add_argument("--dt", type=float, default=0.05)
    sp.add_argument("--t-max", type=float, default=5000.0)
    sp.add_argument("--noise", type=float, default=1e-6)

    sp = command("gl-embed", cmd_gl_embed, "AB Stokes wave against the Ginzburg-Landau amplitude")
    sp.add_argument("--model")
    sp.add_argument("--param", action="append", metavar="KEY=VALUE")
    sp.add_argument("--delta", type=float, default=0.01)
    sp.add_argument("--R", type=float, default=0.05)

    sp = command("chaos-pair", cmd_chaos_pair, "extended PDE next to its AB-system")
    sp.add_argument("--alpha", type=float, default=0.76)
    sp.add_argument("--beta", type=float, default=2.0)
    sp.add_argument("--delta", type=float, default=0.05)
    sp.add_argument("--wavelengths", type=int, default=4)
    sp.add_argument("--N-ab", type=int, default=64)
    sp.add_argument("--N-pde", type=int)
    sp.add_argument("--tau-max", type=float, default=5.0)
    sp.add_argument("--dt", type=float, default=0.05)
    sp.add_argument("--dt-pde", type=float)
    sp.add_argument("--record-every", type=float, default=1.0)
    sp.add_argument("--noise", type=float, default=1e-6)
    sp.add_argument("--stride", type=int, default=1)
    return p


def _apply_config(parser, argv):
    argv = _join_negative_values(sys.argv[1:] if argv is None else list(argv))
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        data = io.load_json(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config {args.config}: {exc}")
    params = data.get("params", data.get("config"))
    if not isinstance(params, dict):
        parser.error(f"{args.config}: expected a 'params' or 'config' map")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    unknown = set(params) - known
    if unknown:
        parser.error(f"{args.config}: unknown parameters {sorted(unknown)}")
    sub.set_defaults(**{k: v for k, v in params.items() if k not in ("out", "config")})
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    args = _apply_config(parser, argv)
    try:
        return args.func(args)
    except (UsageError, ModelError) as exc:
        print(f"turingfold {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except BifurcationError as exc:
        print(f"turingfold {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
