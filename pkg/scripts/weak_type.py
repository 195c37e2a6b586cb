"""Implied restricted weak-type constants of the extremizer at the critical q.

    python scripts/weak_type.py --jmax 8
"""

import argparse

from skelmax.operators import OperatorConfig
from skelmax.scaling import critical_q, skeleton_extremizer, weak_type_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--jmax", type=int, default=8)
    args = ap.parse_args()
    q = critical_q(args.n, args.k)
    lambdas = [0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99]
    tops = []
    for j in range(4, args.jmax + 1):
        d = 2.0**-j
        _, top = weak_type_scan(skeleton_extremizer(args.n, args.k, d), lambdas, q, OperatorConfig(args.n, args.k, d))
        tops.append(top)
        print(f"delta=2^-{j}  max implied constant {top:.6f}")
    print(f"q={q:.4f}  spread {max(tops) / min(tops):.4f}")


if __name__ == "__main__":
    main()
