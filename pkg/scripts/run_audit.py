#!/usr/bin/env python3
"""Audit the spectral / isoperimetric inequality chain on a model surface."""
import argparse
import math

from rkl.spectral import inequality_audit
from rkl.surface import EuclideanPlane, HyperbolicDisc, Sphere

MODELS = {"hyperbolic_disc": HyperbolicDisc, "euclidean_plane": EuclideanPlane,
          "sphere": Sphere}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", choices=sorted(MODELS), default="hyperbolic_disc")
    ap.add_argument("--nu", type=float, default=4.0)
    args = ap.parse_args()

    kwargs = {"nu": args.nu}
    if args.model == "sphere":
        kwargs = {"lambda1": 2.0, "nu": None, "r_max": math.pi / 2}
    rep = inequality_audit(MODELS[args.model](), **kwargs)
    cheeger = rep["cheeger"]
    print(f"{'cheeger':>10}: lhs {cheeger['lhs']:.6g} vs rhs "
          f"{cheeger['rhs']:.6g} (ratio {cheeger['ratio']:.4f})  "
          f"ok={cheeger['ok']}")
    li = rep.get("li")
    if li:
        print(f"{'li':>10}: measured {li['measured']:.6g} vs threshold "
              f"{li['threshold']:.6g}  ok={li['ok']}")
    for name in ("sobolev_l2", "nash"):
        rows = rep.get(name) or []
        for row in rows:
            print(f"{name:>10}: ratio {row['ratio']:.4f}  ok={row['ok']}")
    print(f"all_ok: {rep['all_ok']}")


if __name__ == "__main__":
    main()
