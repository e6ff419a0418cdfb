#!/usr/bin/env python
"""Output power at both ports as the phase on input 1 is swept (coherent light)."""
import argparse
import math
from pathlib import Path

import numpy as np

from lossybs import ScatteringMatrix, classical_interference
from lossybs.io import csv_text


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/classical_interference.csv")
    parser.add_argument("--alpha", type=float, default=math.pi, help="phi1 + phi2 in radians")
    parser.add_argument("--t", type=float, default=0.5)
    parser.add_argument("--r", type=float, default=0.5)
    parser.add_argument("--points", type=int, default=361)
    args = parser.parse_args()

    S = ScatteringMatrix.symmetric(args.t, args.r, args.alpha)
    theta = np.linspace(0.0, 2.0 * math.pi, args.points)
    p1, p2 = classical_interference(S, theta, 1.0, 1.0)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(csv_text(("theta", "power_b1", "power_b2"), zip(theta, p1, p2)))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
