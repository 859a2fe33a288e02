#!/usr/bin/env python3
"""Hyperbolic ball blended into a quasi-isometric exterior: kernel limit check."""
import argparse

from rkl.convergence import blended_metric_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radii", type=float, nargs="+", default=[4, 6, 8])
    ap.add_argument("--basis-size", type=int, default=48)
    ap.add_argument("--n-rho", type=int, default=800)
    ap.add_argument("--conformal-outside", action="store_true",
                    help="keep the exterior conformal (control run)")
    args = ap.parse_args()

    rep = blended_metric_experiment(R_list=args.radii, basis_size=args.basis_size,
                                    n_rho=args.n_rho,
                                    conformal_outside=args.conformal_outside)
    print(f"target kernel {rep.params['target']:.8f}")
    print(f"{'R':>6} {'kernel':>14} {'ball kernel':>14} {'difference':>14}")
    for row in rep.rows:
        print(f"{row['R']:>6g} {row['kernel']:>14.8f} "
              f"{row['kernel_ball']:>14.8f} {row['difference']:>14.6e}")
    print(f"min lambda1 R^2 = {rep.params['lambda1_R2_min']:.3f} "
          f"(condition ok: {rep.params['condition_ok']})")
    print(f"verdict: {rep.verdict}")


if __name__ == "__main__":
    main()
