"""Self-describing JSON records for torus solutions and Galerkin results.

Floats are written with 17 significant digits so that every double
round-trips exactly; reading a record back gives bit-identical arrays.
"""

from __future__ import annotations

import json
import math

import numpy as np

from . import __version__, galerkin, solver
from .errors import DomainError
from .params import ModelParams

SOLUTION_KIND = "torus-solution"
GALERKIN_KIND = "galerkin-result"
_ARRAY_FIELDS = ("grid_t", "f", "g", "u", "v")


def _number(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    if x == 0.0 and math.copysign(1.0, x) < 0:
        return "-0.0"  # a bare -0 would parse back as the integer 0
    return format(x, ".17g")


def _dump(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(str(v) if isinstance(v, int) else _number(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _dump(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    return _number(obj)


def dumps(record: dict) -> str:
    return _dump(record) + "\n"


def _params_block(params: ModelParams) -> dict:
    return {"lambda": params.lam, "ell": params.ell}


def _read_params(record: dict) -> ModelParams:
    block = record["params"]
    return ModelParams(float(block["lambda"]), float(block["ell"]))


def solution_record(solution: solver.TorusSolution) -> dict:
    return {
        "kind": SOLUTION_KIND,
        "version": __version__,
        "params": _params_block(solution.params),
        "K": solution.K,
        "k": solution.k,
        "n_grid": solution.n_grid,
        "volume": solution.volume,
        "residual_sup": solution.residual_sup,
        "arrays": {name: getattr(solution, name) for name in _ARRAY_FIELDS},
    }


def solution_to_json(solution: solver.TorusSolution) -> str:
    return dumps(solution_record(solution))


def solution_from_json(text: str) -> solver.TorusSolution:
    record = json.loads(text)
    if record.get("kind") != SOLUTION_KIND:
        raise DomainError(f"not a torus solution record (kind={record.get('kind')!r})")
    arrays = {name: np.asarray(record["arrays"][name], dtype=float) for name in _ARRAY_FIELDS}
    n = int(record["n_grid"])
    if any(len(a) != n for a in arrays.values()):
        raise DomainError("array lengths disagree with n_grid")
    return solver.TorusSolution(
        params=_read_params(record),
        K=float(record["K"]),
        k=int(record["k"]),
        volume=float(record["volume"]),
        residual_sup=float(record["residual_sup"]),
        **arrays,
    )


def galerkin_record(result: galerkin.GalerkinResult) -> dict:
    state = result.state
    t, p1, p2 = state.to_grid()
    return {
        "kind": GALERKIN_KIND,
        "version": __version__,
        "params": _params_block(state.params),
        "energy": result.energy,
        "gradient_norm": result.gradient_norm,
        "nehari_residual": result.nehari_residual,
        "restarts_used": result.restarts_used,
        "n_grid": len(t),
        "arrays": {"grid_t": t, "density": np.abs(p1) ** 2 + np.abs(p2) ** 2},
        "spectral": {
            "N": state.N,
            "modes": [int(n) for n in state.modes],
            "c1": [[float(z.real), float(z.imag)] for z in state.c1],
            "c2": [[float(z.real), float(z.imag)] for z in state.c2],
        },
        "runs": [
            {
                "label": r.label,
                "energy": r.energy,
                "gradient_norm": r.gradient_norm,
                "iterations": r.iterations,
                "converged": r.converged,
            }
            for r in result.runs
        ],
    }


def galerkin_to_json(result: galerkin.GalerkinResult) -> str:
    return dumps(galerkin_record(result))


def galerkin_state_from_json(text: str) -> galerkin.FourierState:
    record = json.loads(text)
    if record.get("kind") != GALERKIN_KIND:
        raise DomainError(f"not a Galerkin record (kind={record.get('kind')!r})")
    spec = record["spectral"]
    c1 = np.array([complex(re, im) for re, im in spec["c1"]])
    c2 = np.array([complex(re, im) for re, im in spec["c2"]])
    return galerkin.FourierState(_read_params(record), int(spec["N"]), c1, c2)
