#!/usr/bin/env python3
"""Synthetic benchmark: all five classifiers on all 84 features, then on the CFS subset.

Prints two comparison tables (Accuracy / Speed) plus a label-permutation
control, and leaves every stage artifact under ``--out``.

    python scripts/run_benchmark.py --out bench --seed 7
"""
import argparse
import logging
import time
from pathlib import Path

import numpy as np

from gaitkit.classifiers import KINDS
from gaitkit.evaluation import cross_validate, make_folds
from gaitkit.features import normalize
from gaitkit.pipeline import PipelineConfig, load_features, run
from gaitkit.selection import best_first_search
from gaitkit.synthgen import GenSpec, default_profiles, generate, write_dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("bench_out"))
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--subjects", type=int, default=4)
    ap.add_argument("--sessions", type=int, default=2)
    ap.add_argument("--duration", type=float, default=160.0, help="seconds per session")
    ap.add_argument("--k-folds", type=int, default=5)
    ap.add_argument("--permutations", type=int, default=5, help="label-permutation control repeats")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    t0 = time.perf_counter()
    spec = GenSpec(default_profiles(args.subjects, args.seed), args.sessions, args.duration, seed=args.seed)
    write_dataset(generate(spec), spec, args.out / "data")
    cfg = PipelineConfig(out=args.out, seed=args.seed, k_folds=args.k_folds,
                         selection="cfs-bestfirst", classifiers=KINDS)
    results = run(cfg)
    for feature_set in results:
        print((args.out / f"comparison_{feature_set}.txt").read_text())

    m = load_features(cfg)
    counts = {c: int(np.sum(m.labels == c)) for c in m.classes}
    print("windows per subject:", counts)

    # chance-level control: destroy the label/feature link, rerun selection + 1-NN
    rng = np.random.default_rng(args.seed)
    accs = []
    for _ in range(args.permutations):
        pm = m.with_labels(rng.permutation(m.labels))
        sel = best_first_search(normalize(pm))
        plan = make_folds(pm.labels, args.k_folds, args.seed)
        accs.append(cross_validate(pm.select(sel.selected), "knn", plan=plan).accuracy)
    print(f"permuted-label 1-NN accuracy: mean {np.mean(accs):.3f} "
          f"(chance {1 / len(m.classes):.3f}), runs {[round(a, 3) for a in accs]}")
    print(f"total {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
