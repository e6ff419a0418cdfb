#!/usr/bin/env python
"""Maximal coincidence probability: full map and cross-sections at fixed t^2 / r^2."""
import argparse
import math
from pathlib import Path

import numpy as np

from lossybs import max_coincidence, max_coincidence_map
from lossybs.cli import MAP_HEADER
from lossybs.io import csv_text


def cross_section(ratio, points):
    """(t^2, max p11) from zero up to the lossless edge t^2 + r^2 = 1."""
    t2_end = ratio / (1.0 + ratio)
    rows = []
    for t2 in np.linspace(t2_end / points, t2_end, points):
        r2 = min(t2 / ratio, 1.0 - t2)
        t, r = math.sqrt(t2), math.sqrt(r2)
        rows.append((ratio, t2, r2, max_coincidence(t, r, t, r)))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="out")
    parser.add_argument("--resolution", type=int, default=200)
    parser.add_argument("--ratios", type=float, nargs="+", default=[0.25, 0.5, 1.0, 2.0, 4.0])
    parser.add_argument("--points", type=int, default=200)
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    (out / "max_coincidence.csv").write_text(
        csv_text(MAP_HEADER, max_coincidence_map(args.resolution).rows()))
    rows = [row for k in args.ratios for row in cross_section(k, args.points)]
    (out / "max_coincidence_cross_sections.csv").write_text(csv_text(("ratio", "t2", "r2", "max_p11"), rows))
    t2 = np.linspace(0.0, 1.0, 201)
    (out / "lossless_coincidence.csv").write_text(csv_text(("t2", "p11"), zip(t2, (1.0 - 2.0 * t2) ** 2)))
    print(f"wrote {out}/max_coincidence*.csv and {out}/lossless_coincidence.csv")


if __name__ == "__main__":
    main()
