#!/usr/bin/env python
"""Delay scans at several alpha through the CLI, using configs/hom_scan_spdc.json."""
import argparse
import sys
from pathlib import Path

from lossybs.cli import run

ROOT = Path(__file__).resolve().parent.parent


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(ROOT / "configs" / "hom_scan_spdc.json"))
    parser.add_argument("--out", default="out/hom_scan.csv")
    args = parser.parse_args()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    sys.exit(run(["hom-scan", "--config", args.config, "--out", args.out]))


if __name__ == "__main__":
    main()
