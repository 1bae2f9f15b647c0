#!/usr/bin/env python3
"""Accuracy across the three corpus separation profiles.

Generates one corpus per profile at the same size and seed, runs the full
extract/train/evaluate pipeline on each, and prints a compact table.  The
expected pattern: `separated` near-perfect, `overlapped` in between,
`identical` at chance.

Example:
    python scripts/benchmark_profiles.py --speakers 6 --vowels-per-speaker 8 \
        --workdir /tmp/profiles
"""

import argparse
import os
import sys
import time

import numpy as np

from dialectid import evaluation, features, forest, synth


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--speakers", type=int, default=6)
    parser.add_argument("--vowels-per-speaker", type=int, default=8)
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--n-estimators", type=int, default=200)
    parser.add_argument("--max-features", type=int, default=12)
    parser.add_argument("--workdir", required=True)
    args = parser.parse_args()

    print(f"{'profile':>11} {'rows':>5} {'accuracy':>9} {'seconds':>8}")
    for profile in ("separated", "overlapped", "identical"):
        started = time.monotonic()
        corpus_dir = os.path.join(args.workdir, profile)
        manifest = os.path.join(corpus_dir, "manifest.csv")
        if not os.path.exists(manifest):
            manifest = synth.generate_corpus(
                synth.dialect_profile(profile), args.speakers,
                args.vowels_per_speaker, args.seed, corpus_dir)
        dataset, failures = features.build_dataset(manifest, "phoneme")
        if failures:
            print(f"{profile}: {len(failures)} extraction failures", file=sys.stderr)
        split = evaluation.stratified_split(dataset, 0.2, 42)
        train = features.Dataset(tuple(dataset.rows[i] for i in split.train_indices))
        model = forest.train_forest(train, forest.ForestParams(
            n_estimators=args.n_estimators, max_features=args.max_features,
            seed=args.seed))
        test_x = np.vstack([dataset.rows[i].values for i in split.test_indices])
        test_y = dataset.labels()[list(split.test_indices)]
        acc = float(np.mean(forest.forest_predict_many(model, test_x) == test_y))
        print(f"{profile:>11} {len(dataset):>5} {acc:>9.4f} "
              f"{time.monotonic() - started:>8.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
