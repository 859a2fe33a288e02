#!/usr/bin/env python3
"""Exhaust a complete model surface by geodesic balls and track the kernel gap."""
import argparse

from rkl.convergence import exhaustion_experiment
from rkl.surface import EuclideanPlane, HyperbolicDisc

MODELS = {"hyperbolic_disc": HyperbolicDisc, "euclidean_plane": EuclideanPlane}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", choices=sorted(MODELS), default="hyperbolic_disc")
    ap.add_argument("--radii", type=float, nargs="+", default=[3, 4, 6, 8, 10, 12])
    ap.add_argument("--stencil-radius", type=float, default=0.0,
                    help="geodesic radius of the evaluation stencil")
    ap.add_argument("--basis-size", type=int, default=64)
    args = ap.parse_args()

    rep = exhaustion_experiment(MODELS[args.model](), E_radius=args.stencil_radius,
                                R_list=args.radii, basis_size=args.basis_size)
    print(f"model {args.model}, stencil radius {args.stencil_radius}")
    print(f"{'R':>6} {'difference':>14} {'eig envelope':>14} {'cheeger env':>14}")
    for row in rep.rows:
        print(f"{row['R']:>6g} {row['difference']:>14.6e} "
              f"{row['bound_eigenvalue']:>14.6e} {row['bound_cheeger']:>14.6e}")
    print(f"fitted rate {rep.fitted_rate:.3f}, verdict: {rep.verdict}")


if __name__ == "__main__":
    main()
