"""Empirical constants for the interpolation and product inequalities.

Prints a table and, with --json, writes the full report including seeds.
"""
import argparse
import json

from clebsch.flux import TOY_FLUXES, make_toy_flux
from clebsch.grid import Grid
from clebsch.lab import (
    RandomFieldSampler,
    interp_1d_x2_check,
    mixed_interp_report,
    pointwise_coercivity_check,
    product_estimate_report,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json")
    args = ap.parse_args()
    g = Grid((args.n, args.n))
    out = {"seed": args.seed, "n": args.n, "samples": args.samples}

    fields = RandomFieldSampler(g, seed=args.seed, dirichlet=False).sample(args.samples)
    out["interp"] = [interp_1d_x2_check(fields, g, s, t) for s, t in ((1, 2), (2, 5), (3, 5), (1, 6))]
    print("1D interpolation along x2 (max lhs/rhs - 1)")
    for r in out["interp"]:
        print(f"  sigma={r['sigma']} s={r['s']}: {r['max_relative_violation']:+.3e}")

    sampler = RandomFieldSampler(g, seed=args.seed, max_modes=(6, 6))
    out["mixed"] = [mixed_interp_report(sampler, m1, m2, [0.01, 0.1, 1.0], args.samples, args.samples)
                    for m1, m2 in ((1, 1), (2, 3), (1, 4))]
    print("mixed interpolation: C_eps (sample max / span sup)")
    for rep in out["mixed"]:
        for row in rep["table"]:
            print(f"  m1={rep['m1']} m2={rep['m2']} eps={row['eps']:<5}: {row['sample_max']:.4g} / "
                  f"{row['span_sup']:.4g}  validated={row['validated']}")

    psamp = RandomFieldSampler(g, seed=args.seed, max_modes=(4, 4))
    out["product"] = [product_estimate_report(psamp, mi, args.samples // 2)
                      for mi in ([(2, 0), (0, 2)], [(1, 1), (2, 1)], [(1, 0), (0, 2), (2, 0)])]
    print("product estimate: empirical c on two sample sets")
    for rep in out["product"]:
        print(f"  {rep['multiindices']}: {rep['c_first']:.4g}, {rep['c_second']:.4g}  stable={rep['stable']}")

    out["coercivity"] = {name: pointwise_coercivity_check(make_toy_flux(name), Grid((64, 64)), 20 * args.samples,
                                                          args.seed) for name in sorted(TOY_FLUXES)}
    print("pointwise coercivity margin")
    for name, rep in out["coercivity"].items():
        print(f"  {name:<9} {rep['min_margin']:+.3e}  poincare {rep['poincare_constant']:.5f}")

    if args.json:
        with open(args.json, "w") as fh:
            json.dump(out, fh, indent=2)


if __name__ == "__main__":
    main()
