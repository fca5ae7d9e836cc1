#!/usr/bin/env python3
"""Compare best-first CFS against exhaustive subset search on random small matrices.

    python scripts/check_selection.py --trials 100 --max-features 12
"""
import argparse

import numpy as np

from gaitkit.features import FeatureMatrix
from gaitkit.selection import best_first_search, exhaustive_search


def random_matrix(rng, max_features):
    n, d = int(rng.integers(60, 250)), int(rng.integers(3, max_features + 1))
    y = rng.integers(0, int(rng.integers(2, 6)), n)
    X = rng.normal(size=(n, d))
    informative = rng.choice(d, int(rng.integers(1, d + 1)), replace=False)
    X[:, informative] += y[:, None] * rng.uniform(0.1, 2.0, len(informative))
    return FeatureMatrix.from_arrays(X, y)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--max-features", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    gaps, misses = [], 0
    for _ in range(args.trials):
        m = random_matrix(rng, args.max_features)
        bf, ex = best_first_search(m), exhaustive_search(m)
        gap = ex.merit - bf.merit
        gaps.append(gap)
        if gap > 1e-9:
            misses += 1
            print(f"miss: d={len(m.names)} best-first {bf.merit:.6f} vs exhaustive {ex.merit:.6f}")
    print(f"{args.trials} trials, {misses} below the exhaustive optimum, max gap {max(gaps):.2e}")


if __name__ == "__main__":
    main()
