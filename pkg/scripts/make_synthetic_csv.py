#!/usr/bin/env python3
"""Write a synthetic benchmark dataset as CSV files the CLI can consume."""

import argparse
import os

from fagc.datastore import save_features, save_labels
from fagc.synthetic import make_arc_dataset


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--m", type=int, default=18)
    parser.add_argument("--dim", type=int, default=32)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--noise", type=float, default=0.005)
    parser.add_argument("--out", default="data")
    args = parser.parse_args()

    data = make_arc_dataset(m=args.m, dim=args.dim, seed=args.seed,
                            noise=args.noise)
    # Attach a second, inversely varying property so both CLI selectors work.
    hardness = 260.0 - 1.1 * data.labels

    os.makedirs(args.out, exist_ok=True)
    features_path = os.path.join(args.out, "features.csv")
    labels_path = os.path.join(args.out, "labels.csv")
    save_features(features_path, data.ids, data.features)
    save_labels(labels_path, data.ids, conductivity_iacs=data.labels,
                hardness_hv=hardness)
    print(f"wrote {features_path} ({data.n} x {data.feature_dim})")
    print(f"wrote {labels_path}")


if __name__ == "__main__":
    main()
