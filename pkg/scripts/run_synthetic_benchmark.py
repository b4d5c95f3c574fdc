#!/usr/bin/env python3
"""Compare all regressors with and without augmentation on synthetic data.

Prints one table per property-style run: per-model mean R^2 / MAE / RMSE
across folds, plain versus augmented, averaged over several seeds.
"""

import argparse

import numpy as np

from fagc.cli import ALL_MODEL_KINDS
from fagc.evalharness import run_comparison
from fagc.regressors import make_regressor
from fagc.synthetic import make_arc_dataset


def build(kind, seed):
    try:
        return make_regressor(kind, seed=seed)
    except TypeError:
        return make_regressor(kind)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--k-generated", type=int, default=100)
    parser.add_argument("--folds", type=int, default=6)
    parser.add_argument("--teacher", default="decision_tree")
    args = parser.parse_args()

    results: dict[tuple[str, bool], list] = {}
    for seed in range(args.seeds):
        data = make_arc_dataset(seed=seed)
        models = [build(kind, seed) for kind in ALL_MODEL_KINDS]
        teacher = build(args.teacher, seed)
        for use_fagc in (False, True):
            report = run_comparison(
                data, models, use_fagc=use_fagc,
                k_generated=args.k_generated if use_fagc else 0,
                teacher=teacher if use_fagc else None,
                folds=args.folds, seed=seed)
            for agg in report.aggregates():
                results.setdefault((agg.model, use_fagc), []).append(
                    (agg.r2, agg.mae, agg.rmse))

    print(f"\nsynthetic benchmark, {args.seeds} seeds, "
          f"K={args.k_generated}, teacher={args.teacher}")
    print(f"{'model':<16}{'setting':<10}{'R2':>8}{'MAE':>8}{'RMSE':>8}")
    print("-" * 50)
    for kind in ALL_MODEL_KINDS:
        for use_fagc in (False, True):
            rows = results[(kind, use_fagc)]
            r2 = np.mean([r[0] for r in rows])
            mae = np.mean([r[1] for r in rows])
            rmse = np.mean([r[2] for r in rows])
            tag = "fagc" if use_fagc else "plain"
            print(f"{kind:<16}{tag:<10}{r2:>8.3f}{mae:>8.3f}{rmse:>8.3f}")


if __name__ == "__main__":
    main()
