"""Mean greedy coplanar load of random skeleton families as the family grows.

    python scripts/coplanar_growth.py --trials 8 --max-log2m 12
"""

import argparse

from skelmax.selection import coplanar_growth_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--trials", type=int, default=8)
    ap.add_argument("--max-log2m", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    ms = [2**j for j in range(6, args.max_log2m + 1)]
    res = coplanar_growth_experiment(args.n, args.k, ms, args.trials, args.seed)
    for m, mean in res.table:
        print(f"m={m:>6}  mean max_coplanar={mean:.3f}")
    print(f"slope {res.slope:.4f}, bound exponent {res.predicted_exponent:.4f}")


if __name__ == "__main__":
    main()
