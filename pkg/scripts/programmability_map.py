#!/usr/bin/env python
"""Programmable range of the coincidence probability over (t^2, r^2)."""
import argparse
from pathlib import Path

from lossybs import programmability_map
from lossybs.cli import MAP_HEADER
from lossybs.io import csv_text


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/programmability.csv")
    parser.add_argument("--resolution", type=int, default=200)
    args = parser.parse_args()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(csv_text(MAP_HEADER, programmability_map(args.resolution).rows()))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
