"""CG iteration counts for the available preconditioners on the toy and Euler problems."""
import argparse

import numpy as np

from clebsch.euler import make_scenario
from clebsch.flux import make_toy_flux
from clebsch.grid import Grid
from clebsch.solver import SolveOptions, minimize
from clebsch.toy import ToyProblem, manufactured_rhs


def toy(n, precond):
    g = Grid((n, n))
    x1, x2 = g.mesh
    u = 0.05 * np.sin(np.pi * x1) * np.sin(2 * np.pi * x2)
    u[[0, -1]] = 0
    flux = make_toy_flux("quartic")
    return ToyProblem(g, flux, manufactured_rhs(g, flux, u), precond=precond)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--toy-n", type=int, default=64)
    ap.add_argument("--euler-n", type=int, default=24)
    args = ap.parse_args()
    opts = SolveOptions(max_cg=2000, max_newton=50)
    print(f"{'problem':<8} {'preconditioner':<15} {'newton':>6} {'cg total':>9} {'converged':>9}")
    for name, build in (("toy", lambda p: toy(args.toy_n, p)),
                        ("euler", lambda p: make_scenario("perturbed", Grid((args.euler_n,) * 3), precond=p))):
        for p in ("reference", "laplacian", "none"):
            pb = build(p)
            _, rep = minimize(pb, pb.zero_state(), opts)
            cg = sum(r.cg_iterations for r in rep.history)
            print(f"{name:<8} {p:<15} {rep.iterations:>6} {cg:>9} {str(rep.converged):>9}")


if __name__ == "__main__":
    main()
