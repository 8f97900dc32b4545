"""Flat ``key = value`` run configuration with dotted sections.

Lines are ``section.key = value``; ``#`` starts a comment.  Values are
Python literals (numbers, strings, booleans, lists); bare words are read as
strings.  Every key must be known to the schema of the chosen subcommand,
so a typo is an error rather than a silently ignored setting.
"""
from __future__ import annotations

import ast
import inspect
from dataclasses import dataclass, field
from pathlib import Path

from .euler import SCENARIOS
from .flux import TOY_FLUXES, ConfigurationError

COMMANDS = ("toy-solve", "euler-solve", "verify", "export")

_SOLVER = {
    "solver.grad_tol": 1e-10,
    "solver.max_newton": 30,
    "solver.max_cg": 500,
    "solver.cg_rtol": 1e-6,
    "solver.armijo_c1": 1e-4,
    "solver.backtrack": 0.5,
    "solver.max_halvings": 40,
    "solver.radius": 1.0,
    "solver.curvature_tol": 1e-14,
    "solver.preconditioner": "reference",
}
_OUTPUT = {
    "seed": 0,
    "output.dir": "out",
    "output.fields": "csv",
    "output.jsonl": False,
    "output.state": True,
}
_TOY = {
    "grid.n": [64, 64],
    "grid.extents": [1.0, 1.0],
    "grid.derivative_order": 4,
    "flux.name": "quartic",
    "rhs.mode": "manufactured",
    "rhs.amplitude": 0.05,
    "rhs.kx": 1,
    "rhs.ky": 1,
    "check.samples": 256,
}
_EULER = {
    "grid.n": [32, 32, 32],
    "grid.extents": [1.0, 1.0, 1.0],
    "grid.derivative_order": 4,
    "scenario.name": "perturbed",
    "scenario.eps": 1e-2,
    "scenario.amplitude": 1e-3,
    "check.norm_order": 5,
}
_VERIFY = {
    "verify.flux": True,
    "verify.hydro": True,
    "verify.lab": True,
    "verify.bounds": True,
    "verify.samples": 100,
    "verify.toy_flux": "quartic",
    "verify.toy_n": [64, 64],
    "verify.euler_n": [16, 16, 16],
    "verify.lab_n": [32, 32],
    "verify.eps": 1e-2,
}
_EXPORT = {
    "export.state": "out/state.npz",
}

SCHEMAS = {
    "toy-solve": {**_OUTPUT, **_SOLVER, **_TOY},
    "euler-solve": {**_OUTPUT, **_SOLVER, **_EULER},
    "verify": {**_OUTPUT, **_VERIFY},
    "export": {"output.dir": "out", "output.fields": "both", "export.state": "out/state.npz"},
}


@dataclass
class RunConfig:
    command: str
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    def section(self, prefix: str) -> dict:
        p = prefix + "."
        return {k[len(p):]: v for k, v in self.values.items() if k.startswith(p)}

    def to_dict(self) -> dict:
        return {"command": self.command, **{k: self.values[k] for k in sorted(self.values)}}


def parse_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        out[key] = _literal(val)
    return out


def _literal(text: str):
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def _flux_param_keys(name: str) -> set[str]:
    factory = TOY_FLUXES[name]
    return {f"flux.{p}" for p in inspect.signature(factory).parameters}


def resolve(command: str, raw: dict) -> RunConfig:
    """Merge ``raw`` over the schema defaults and validate."""
    if command not in COMMANDS:
        raise ConfigurationError(f"unknown command {command!r}; expected one of {COMMANDS}")
    schema = SCHEMAS[command]
    raw = dict(raw)
    raw.pop("command", None)
    values = dict(schema)
    allowed = set(schema)
    if command == "toy-solve":
        name = raw.get("flux.name", schema["flux.name"])
        if name not in TOY_FLUXES:
            raise ConfigurationError(f"flux.name: unknown flux {name!r}; known: {sorted(TOY_FLUXES)}")
        allowed |= _flux_param_keys(name)
    for key in raw:
        if key not in allowed:
            raise ConfigurationError(f"unknown key {key!r} for {command}")
    values.update(raw)
    _validate(command, values)
    return RunConfig(command, values)


def _validate(command: str, v: dict):
    def need(cond, key, msg):
        if not cond:
            raise ConfigurationError(f"{key}: {msg} (got {v[key]!r})")

    if "grid.n" in v:
        n = v["grid.n"]
        dim = 2 if command == "toy-solve" else 3
        if isinstance(n, int):
            n = v["grid.n"] = [n] * dim
        need(isinstance(n, (list, tuple)) and len(n) == dim and all(isinstance(c, int) and c > 1 for c in n),
             "grid.n", f"expected {dim} positive integers")
        ext = v["grid.extents"]
        need(isinstance(ext, (list, tuple)) and len(ext) == dim and all(float(e) > 0 for e in ext),
             "grid.extents", f"expected {dim} positive lengths")
        need(v["grid.derivative_order"] in (1, 2, 3, 4), "grid.derivative_order", "must be 1, 2, 3 or 4")
    if "solver.preconditioner" in v:
        need(v["solver.preconditioner"] in ("reference", "laplacian", "none"), "solver.preconditioner",
             "must be reference, laplacian or none")
    if "output.fields" in v:
        need(v["output.fields"] in ("csv", "vtk", "both", "none"), "output.fields", "must be csv, vtk, both or none")
    if command == "toy-solve":
        need(v["rhs.mode"] in ("manufactured", "trig", "zero"), "rhs.mode", "must be manufactured, trig or zero")
    if command == "euler-solve":
        need(v["scenario.name"] in SCENARIOS, "scenario.name", f"unknown scenario; known: {list(SCENARIOS)}")
    if "seed" in v:
        need(isinstance(v["seed"], int), "seed", "must be an integer")


def load(command: str, path=None, overrides: dict | None = None) -> RunConfig:
    raw = parse_text(Path(path).read_text()) if path else {}
    if overrides:
        raw.update(overrides)
    return resolve(command, raw)


def render(cfg: RunConfig) -> str:
    return "\n".join(f"{k} = {cfg.values[k]!r}" for k in sorted(cfg.values)) + "\n"
