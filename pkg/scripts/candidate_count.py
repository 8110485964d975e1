"""Count the isolated solutions of the minimal moment system over random instances.

The Bézout bound is (l+1)^r; the count of distinct finite solutions is
reported per (r, l), never asserted.

Usage: python3 scripts/candidate_count.py [--trials 20] [--max-r 3] [--max-l 2]
"""

import argparse
from collections import Counter

import numpy as np

from localdirac import local_dirac_moments, mixture_of
from localdirac.recovery import solve_minimal_system


def random_mixture(rng, r, l):
    while True:
        xi = np.sort(rng.uniform(-2, 2, size=r))
        if r == 1 or np.min(np.diff(xi)) >= 0.5:
            break
    lams = [[rng.uniform(0.2, 1.0), *rng.uniform(-1, 1, size=l)] for _ in range(r)]
    return mixture_of(xi, lams)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--max-r", type=int, default=3)
    ap.add_argument("--max-l", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'r':>2} {'l':>2} {'bezout':>7}  counts")
    for r in range(1, args.max_r + 1):
        for l in range(0, args.max_l + 1):
            counts = Counter()
            for _ in range(args.trials):
                m = local_dirac_moments(random_mixture(rng, r, l), (l + 2) * r)
                counts[len(solve_minimal_system(m, r, l))] += 1
            print(f"{r:>2} {l:>2} {(l + 1) ** r:>7}  {dict(sorted(counts.items()))}")


if __name__ == "__main__":
    main()
