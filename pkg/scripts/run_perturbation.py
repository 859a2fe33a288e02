#!/usr/bin/env python3
"""Kernel stability under a shrinking anisotropic metric perturbation."""
import argparse

from rkl.convergence import perturbation_experiment
from rkl.surface import chart_from_callable

RECT = (0.0, 1.0, 0.0, 1.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--j", type=int, nargs="+", default=[8, 16, 32, 64],
                    help="perturbation indices; amplitude decays like 2/j")
    ap.add_argument("--nodes", type=int, default=65, help="chart nodes per axis")
    ap.add_argument("--basis-size", type=int, default=48)
    args = ap.parse_args()

    shape = (args.nodes, args.nodes)
    limit = chart_from_callable(lambda x, y: (1.0, 0.0, 1.0), RECT, shape)
    perts = [chart_from_callable(lambda x, y, j=j: (1.0 + 2.0 / j, 0.0, 1.0),
                                 RECT, shape) for j in args.j]
    out = perturbation_experiment(limit, perts, basis_size=args.basis_size)
    print(f"{'j':>6} {'kernel gap':>14} {'nesting defect':>16} {'metric gap':>14}")
    for j, g, d, mg in zip(args.j, out["gaps"], out["inequality_defects"],
                           out["metric_gaps"]):
        print(f"{j:>6d} {g:>14.6e} {d:>16.6e} {mg:>14.6e}")
    print(f"verdict: {out['verdict']}")


if __name__ == "__main__":
    main()
