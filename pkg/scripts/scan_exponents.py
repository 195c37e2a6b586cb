"""Fitted delta-exponents of the skeleton maximal operator against the predicted ones.

    python scripts/scan_exponents.py --jmax 8
"""

import argparse

from skelmax.operators import OperatorConfig
from skelmax.scaling import norm_scan, predicted_exponent

CASES = [(2, 1, 2, 8), (2, 1, 2, 2), (2, 0, 2, 8), (2, 1, 3, 12)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--jmin", type=int, default=4)
    ap.add_argument("--jmax", type=int, default=8)
    args = ap.parse_args()
    deltas = [2.0**-j for j in range(args.jmin, args.jmax + 1)]
    print(f"{'n':>2} {'k':>2} {'p':>4} {'q':>5}  {'regime':<20} {'predicted':>9} {'fitted':>9} {'R^2':>7}")
    for n, k, p, q in CASES:
        pred = predicted_exponent(p, q, n, k)
        series = norm_scan(deltas, ["skeleton", "random"], p, q, OperatorConfig(n, k, deltas[0]))
        print(f"{n:>2} {k:>2} {p:>4} {q:>5}  {pred.regime:<20} {pred.exponent:>9.4f} "
              f"{series.slope:>9.4f} {series.r2:>7.4f}")


if __name__ == "__main__":
    main()
