#!/usr/bin/env python3
"""Writes the bundled two-class synthetic dataset used by the experiment example."""

import argparse
import csv
import random


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=3000)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--shift", type=float, default=2.0)
    parser.add_argument("--out", default="data/synthetic2d.csv")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    centers = {1: (0.0, 0.0), 2: (1.5 * args.shift, 1.0 * args.shift)}
    with open(args.out, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["x1", "x2", "label"])
        for i in range(args.rows):
            label = 1 if rng.random() < 0.55 else 2
            cx, cy = centers[label]
            x1 = rng.gauss(cx, 1.0)
            x2 = rng.gauss(cy, 1.0)
            writer.writerow([f"{x1:.4f}", f"{x2:.4f}", label])


if __name__ == "__main__":
    main()
