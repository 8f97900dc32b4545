"""Command-line entry point: ``clebsch <command> [config] [--set key=value ...]``.

Exit status: 0 on success, 2 when a solve does not converge or a
verification check fails, 1 on configuration errors.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import COMMANDS, RunConfig, load, parse_text, resolve, _literal
from .euler import euler_residual, euler_solve, flow_fields, make_scenario, quadratic_bound_check
from .export import write_csv, write_vtk
from .flux import (
    ConfigurationError,
    Background,
    euler_flux_identity_defect,
    hydro_flux,
    hydro_flux_cross,
    hydro_jacobian,
    make_toy_flux,
    toy_check_hypotheses,
)
from .grid import Grid, GridSizeError
from .lab import (
    RandomFieldSampler,
    interp_1d_x2_check,
    mixed_interp_report,
    pointwise_coercivity_check,
    product_estimate_report,
)
from .solver import NonFiniteObjective, SolveOptions
from .toy import ToyProblem, manufactured_rhs, toy_solve


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings, tuples to lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def _solve_options(cfg: RunConfig) -> SolveOptions:
    s = cfg.section("solver")
    s.pop("preconditioner", None)
    return SolveOptions(**s)


def _grid(cfg: RunConfig) -> Grid:
    return Grid(tuple(cfg["grid.n"]), tuple(float(e) for e in cfg["grid.extents"]), cfg["grid.derivative_order"])


# ---------------------------------------------------------------------------------------
# problem builders (shared by solve and export)


def build_toy(cfg: RunConfig):
    grid = _grid(cfg)
    params = cfg.section("flux")
    name = params.pop("name")
    flux = make_toy_flux(name, **params)
    x1, x2 = grid.mesh
    A, kx, ky = float(cfg["rhs.amplitude"]), cfg["rhs.kx"], cfg["rhs.ky"]
    L1, L2 = grid.extents
    exact = None
    if cfg["rhs.mode"] == "manufactured":
        exact = A * np.sin(kx * np.pi * x1 / L1) * np.sin(2 * ky * np.pi * x2 / L2)
        exact[0] = 0.0
        exact[-1] = 0.0
        h = manufactured_rhs(grid, flux, exact)
    elif cfg["rhs.mode"] == "trig":
        h = A * np.sin(kx * np.pi * x1 / L1) * np.cos(2 * ky * np.pi * x2 / L2)
    else:
        h = np.zeros(grid.shape)
    return ToyProblem(grid, flux, h, exact, precond=cfg["solver.preconditioner"])


def build_euler(cfg: RunConfig):
    grid = _grid(cfg)
    return make_scenario(
        cfg["scenario.name"], grid, eps=float(cfg["scenario.eps"]), amplitude=float(cfg["scenario.amplitude"]),
        radius=float(cfg["solver.radius"]), norm_order=cfg["check.norm_order"], precond=cfg["solver.preconditioner"],
    )


# ---------------------------------------------------------------------------------------
# outputs


def _write_report(out: Path, cfg: RunConfig, body: dict, started: float):
    report = {
        "header": {
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "elapsed_seconds": time.perf_counter() - started,
            "version": __version__,
        },
        "config": cfg.to_dict(),
        **body,
    }
    (out / "report.json").write_text(json.dumps(_clean(report), indent=2, sort_keys=True) + "\n")


def _write_log(out: Path, cfg: RunConfig, rep):
    (out / "iterations.log").write_text("\n".join(rep.log_lines()) + "\n")
    if cfg.get("output.jsonl"):
        (out / "iterations.jsonl").write_text("\n".join(rep.jsonl_lines()) + "\n")


def _write_fields(out: Path, grid: Grid, fields: dict, mode: str):
    if mode == "none":
        return []
    fdir = out / "fields"
    fdir.mkdir(parents=True, exist_ok=True)
    written = []
    if mode in ("csv", "both"):
        for name, val in fields.items():
            if isinstance(val, tuple):
                for i, c in enumerate(val):
                    written.append(write_csv(fdir / f"{name}{i + 1}.csv", grid, c, f"{name}{i + 1}").name)
            else:
                written.append(write_csv(fdir / f"{name}.csv", grid, val, name).name)
    if mode in ("vtk", "both") and grid.dim == 3:
        written.append(write_vtk(fdir / "fields.vtk", grid, fields).name)
    return sorted(written)


def _save_state(out: Path, cfg: RunConfig, x: np.ndarray):
    np.savez(out / "state.npz", x=x, config=json.dumps(cfg.to_dict(), sort_keys=True))


# ---------------------------------------------------------------------------------------
# commands


def _toy_fields(pb, u):
    return {"u": u, "h": pb.rhs}


def _euler_fields(pb, x):
    F, G = pb.split(x)
    ff = flow_fields(pb, x)
    return {"F": F, "G": G, "p": ff.pressure, "v": ff.velocity}


def cmd_toy(cfg: RunConfig, out: Path, started: float) -> int:
    pb = build_toy(cfg)
    u, rep, hyp = toy_solve(pb, _solve_options(cfg), hypothesis_samples=cfg["check.samples"], seed=cfg["seed"])
    x = pb.state(u)
    body = {
        "solve": rep.to_dict(),
        "hypotheses": hyp,
        "residual_l2": pb.residual(x),
        "functional": pb.value(x),
    }
    if pb.exact_solution is not None:
        body["error_l2"] = pb.grid.l2_norm(u - pb.exact_solution)
    body["fields"] = _write_fields(out, pb.grid, _toy_fields(pb, u), cfg["output.fields"])
    _write_log(out, cfg, rep)
    if cfg["output.state"]:
        _save_state(out, cfg, x)
    _write_report(out, cfg, body, started)
    return 0 if rep.converged else 2


def cmd_euler(cfg: RunConfig, out: Path, started: float) -> int:
    pb = build_euler(cfg)
    x, rep, ff, diag = euler_solve(pb, _solve_options(cfg))
    res = euler_residual(pb, x)
    body = {
        "solve": rep.to_dict(),
        "diagnostics": diag,
        "residual": {"momentum_l2": res["momentum_l2"], "divergence_l2": res["divergence_l2"]},
        "functional": pb.value(x),
    }
    body["fields"] = _write_fields(out, pb.grid, _euler_fields(pb, x), cfg["output.fields"])
    _write_log(out, cfg, rep)
    if cfg["output.state"]:
        _save_state(out, cfg, x)
    _write_report(out, cfg, body, started)
    return 0 if rep.converged else 2


def verify_suite(cfg: RunConfig) -> dict:
    """Run the enabled checks; each entry carries an ``ok`` flag."""
    seed = cfg["seed"]
    n = cfg["verify.samples"]
    results = {}
    if cfg["verify.flux"]:
        flux = make_toy_flux(cfg["verify.toy_flux"])
        hyp = toy_check_hypotheses(flux, Grid(tuple(cfg["verify.toy_n"])), n, seed=seed)
        hyp["ok"] = hyp["symmetry_defect"] <= 1e-6 and hyp["min_coercivity_margin"] >= -1e-12 and hyp["origin_defect"] == 0
        results["toy_hypotheses"] = hyp
    if cfg["verify.hydro"]:
        rng = np.random.default_rng(seed)
        w = rng.standard_normal((n, 6))
        dev, crs = hydro_flux(w), hydro_flux_cross(w)
        rel = float(np.max(np.abs(dev - crs)) / np.max(np.abs(crs)))
        J = hydro_jacobian(w)
        sym = float(np.max(np.abs(J - np.swapaxes(J, -1, -2))))
        e = 1e-6
        fd = np.stack([(hydro_flux(w + e * np.eye(6)[j]) - hydro_flux(w - e * np.eye(6)[j])) / (2 * e) for j in range(6)], -1)
        fd_rel = float(np.max(np.abs(fd - J)) / np.max(np.abs(J)))
        results["hydro_flux"] = {"cross_form_rel": rel, "jacobian_asym": sym, "jacobian_fd_rel": fd_rel,
                                 "ok": rel <= 1e-13 and sym <= 1e-12 and fd_rel <= 1e-7}
    if cfg["verify.lab"]:
        lab_grid = Grid(tuple(cfg["verify.lab_n"]))
        sampler = RandomFieldSampler(lab_grid, seed=seed, dirichlet=False)
        interp = interp_1d_x2_check(sampler.sample(n, stream=3), lab_grid, 2, 5)
        mixed = mixed_interp_report(RandomFieldSampler(lab_grid, seed=seed, max_modes=(6, 6)), 2, 3, [0.1, 1.0], samples=n,
                                    validation=n)
        mixed["ok"] = all(r["finite"] and r["validated"] for r in mixed["table"])
        prod = product_estimate_report(RandomFieldSampler(lab_grid, seed=seed, max_modes=(4, 4)),
                                       [(1, 1), (2, 1)], samples=n)
        prod["ok"] = prod["finite"] and prod["stable"]
        coerc = pointwise_coercivity_check(make_toy_flux(cfg["verify.toy_flux"]), Grid((64, 64)), samples=10 * n, seed=seed)
        coerc["ok"] = coerc["min_margin"] >= -1e-12 and coerc["poincare_ok"]
        results.update(interp_1d=interp, mixed_interp=mixed, product_estimate=prod, pointwise_coercivity=coerc)
    if cfg["verify.bounds"]:
        grid = Grid(tuple(cfg["verify.euler_n"]))
        pb = make_scenario("perturbed", grid, eps=float(cfg["verify.eps"]), precond="none")
        qb = quadratic_bound_check(pb, samples=n, seed=seed)
        _, _, gf, gg = pb.potentials(pb.zero_state())
        qb["flux_identity_defect"] = euler_flux_identity_defect(gf, gg)
        qb["ok"] = qb["pointwise_min_margin"] >= -1e-10 and qb["identity_defect"] <= 1e-12 and qb["affine_min_margin"] >= -1e-10
        results["quadratic_bounds"] = qb
    return results


def cmd_verify(cfg: RunConfig, out: Path, started: float) -> int:
    results = verify_suite(cfg)
    lines = [f"{'check':<24} {'ok':<5}"]
    for name, r in results.items():
        lines.append(f"{name:<24} {str(bool(r['ok'])):<5}")
    (out / "verify.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    _write_report(out, cfg, {"checks": results}, started)
    return 0 if all(r["ok"] for r in results.values()) else 2


def cmd_export(cfg: RunConfig, out: Path, started: float) -> int:
    path = Path(cfg["export.state"])
    if not path.exists():
        raise ConfigurationError(f"export.state: no such file {str(path)!r}")
    data = np.load(path)
    saved = json.loads(str(data["config"]))
    command = saved.pop("command")
    scfg = resolve(command, saved)
    x = data["x"]
    if command == "toy-solve":
        pb = build_toy(scfg)
        fields = _toy_fields(pb, pb.field(x))
    else:
        pb = build_euler(scfg)
        fields = _euler_fields(pb, x)
    if x.shape != pb.weights.shape:
        raise ConfigurationError("export.state: state does not match the saved configuration")
    written = _write_fields(out, pb.grid, fields, cfg["output.fields"])
    _write_report(out, cfg, {"source": saved | {"command": command}, "fields": written}, started)
    return 0


_COMMANDS = {"toy-solve": cmd_toy, "euler-solve": cmd_euler, "verify": cmd_verify, "export": cmd_export}


def run(cfg: RunConfig) -> int:
    started = time.perf_counter()
    out = Path(cfg["output.dir"])
    out.mkdir(parents=True, exist_ok=True)
    return _COMMANDS[cfg.command](cfg, out, started)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="clebsch", description="Variational steady-Euler and toy-PDE solver.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("config", nargs="?", help="key = value configuration file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one key")
    parser.add_argument("--print-config", action="store_true", help="print the resolved configuration and exit")
    args = parser.parse_args(argv)
    try:
        overrides = {}
        for item in args.set:
            if "=" not in item:
                raise ConfigurationError(f"--set expects KEY=VALUE, got {item!r}")
            k, v = item.split("=", 1)
            overrides[k.strip()] = _literal(v.strip())
        cfg = load(args.command, args.config, overrides)
        if args.print_config:
            from .config import render

            print(render(cfg), end="")
            return 0
        return run(cfg)
    except (ConfigurationError, GridSizeError, ValueError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except NonFiniteObjective as exc:
        print(f"solver aborted: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
