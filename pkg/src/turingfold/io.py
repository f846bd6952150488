"""Model files, CSV tables and run manifests."""
from __future__ import annotations

import csv
import json
import platform
from pathlib import Path

import numpy as np

from .models import (
    BUILTIN_RD,
    EXAMPLE_REACTION,
    GeneralScalarModel,
    ModelError,
    PolynomialField,
    PolynomialReaction,
    RDModel,
    ScalarSixthOrder,
)

SCHEMA = "turingfold/1"
SIG_DIGITS = 12


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.{SIG_DIGITS}g}"
    return str(value)


def model_from_dict(data: dict, overrides: dict | None = None):
    """Build a model from its JSON description; ``overrides`` replaces entries of ``params``."""
    if not isinstance(data, dict) or "type" not in data:
        raise ModelError("model description needs a 'type' key")
    params = {**data.get("params", {}), **(overrides or {})}
    kind = data["type"]
    try:
        if kind == "scalar6":
            allowed = {"mu", "nu", "eta", "gamma"}
            unknown = set(params) - allowed
            if unknown:
                raise ModelError(f"unknown parameters {sorted(unknown)} for scalar6")
            return ScalarSixthOrder(**{key: float(v) for key, v in params.items()})
        if kind == "scalar_general":
            react = data.get("reaction")
            reaction = EXAMPLE_REACTION if react is None else _reaction(react)
            b = {(int(j), int(l)): float(v) for j, l, v in data.get("b", [])}
            interval = tuple(data["nu_interval"]) if data.get("nu_interval") else None
            return GeneralScalarModel(
                m=int(data["m"]), a=tuple(data["a"]), a_tilde=tuple(data["a_tilde"]), b=b, reaction=reaction,
                c=tuple(data["c"]) if data.get("c") is not None else None,
                mu=float(params.get("mu", 0.0)), nu=float(params.get("nu", 0.0)), nu_interval=interval,
            )
        if kind == "rd":
            if "builtin" in data:
                name = data["builtin"]
                if name not in BUILTIN_RD:
                    raise ModelError(f"unknown built-in RD model {name!r}")
                return BUILTIN_RD[name](**{key: float(v) for key, v in params.items()})
            n = int(data["n"])
            react = data["reaction"]
            if react.get("kind") != "polynomial":
                raise ModelError("RD model files support polynomial reactions only")
            terms = tuple((int(c), float(v), tuple(int(e) for e in exps)) for c, v, exps in react["terms"])
            return RDModel(n, tuple(data["D"]), PolynomialField(n, terms), mu=float(params.get("mu", 0.0)),
                           nu=float(params.get("nu", 0.0)), name=data.get("name", "rd"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(f"malformed {kind} model description: {exc}") from exc
    raise ModelError(f"unknown model type {kind!r}")


def _reaction(react: dict):
    if react.get("kind") != "polynomial":
        raise ModelError("scalar model files support polynomial reactions only")
    return PolynomialReaction(tuple((int(i), int(j), float(c)) for i, j, c in react["terms"]))


def model_to_dict(model) -> dict:
    return {"schema": SCHEMA, **model.to_dict()}


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def load_model(path, overrides: dict | None = None):
    try:
        data = load_json(path)
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: not valid JSON ({exc})") from exc
    return model_from_dict(data, overrides), data


def write_json(path, data: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_plain(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(f"{float(obj):.{SIG_DIGITS}g}")
    if isinstance(obj, complex):
        return [float(obj.real), float(obj.imag)]
    return obj


def write_csv(path, header: list[str], rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def manifest(command: str, config: dict, outputs: list[str], **extra) -> dict:
    import numpy
    import scipy

    from . import __version__

    return {
        "schema": SCHEMA, "command": command, "config": config, "outputs": outputs,
        "versions": {"turingfold": __version__, "numpy": numpy.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        **extra,
    }
