"""Grid refinement study for the perturbed Euler scenario.

Solves on each grid, prints residuals with observed orders between
consecutive grids, and optionally writes the table as JSON.

    python scripts/refinement_study.py --grids 16 32 48 64 96
"""
import argparse
import json
import math
import time

from clebsch.euler import euler_residual, euler_solve, make_scenario
from clebsch.grid import Grid
from clebsch.solver import SolveOptions


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grids", type=int, nargs="+", default=[16, 32, 48, 64])
    ap.add_argument("--periodic", type=int, default=None,
                    help="fix the periodic resolution instead of refining all axes together")
    ap.add_argument("--eps", type=float, default=1e-2)
    ap.add_argument("--scenario", default="perturbed")
    ap.add_argument("--json", help="write the table here")
    args = ap.parse_args()

    rows = []
    for n in args.grids:
        m = args.periodic or n
        t0 = time.perf_counter()
        pb = make_scenario(args.scenario, Grid((n, m, m)), eps=args.eps)
        x, rep, _, _ = euler_solve(pb, SolveOptions())
        res = euler_residual(pb, x)
        rows.append({
            "n": n, "periodic": m, "newton": rep.iterations, "converged": rep.converged,
            "momentum_l2": res["momentum_l2"], "divergence_l2": res["divergence_l2"],
            "seconds": time.perf_counter() - t0,
        })

    print(f"{'n':>5} {'newton':>6} {'momentum':>11} {'order':>6} {'divergence':>11} {'sec':>6}")
    for i, r in enumerate(rows):
        order = ""
        if i:
            p = rows[i - 1]
            order = f"{math.log(p['momentum_l2'] / r['momentum_l2']) / math.log(r['n'] / p['n']):6.2f}"
            r["order"] = float(order)
        print(f"{r['n']:>5} {r['newton']:>6} {r['momentum_l2']:11.3e} {order:>6} {r['divergence_l2']:11.3e} "
              f"{r['seconds']:6.1f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
