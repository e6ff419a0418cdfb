#!/usr/bin/env python
"""Allowed alpha width over (t^2, r^2) for symmetric devices, plus the t + r = 1 curve."""
import argparse
from pathlib import Path

import numpy as np

from lossybs import tunability_map
from lossybs.cli import MAP_HEADER
from lossybs.io import csv_text


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="out")
    parser.add_argument("--resolution", type=int, default=200)
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    (out / "tunability.csv").write_text(csv_text(MAP_HEADER, tunability_map(args.resolution).rows()))
    t = np.linspace(0.0, 1.0, 201)
    (out / "full_tunability_edge.csv").write_text(csv_text(("t2", "r2"), zip(t**2, (1.0 - t) ** 2)))
    print(f"wrote {out}/tunability.csv and {out}/full_tunability_edge.csv")


if __name__ == "__main__":
    main()
