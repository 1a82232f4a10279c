#!/usr/bin/env python3
"""Execute every shipped preset into an output tree.

Usage: python scripts/run_all_presets.py [--out DIR] [--workers N]
"""

import argparse
import time

from nhlattice import load_preset, preset_names, run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="nhlattice_out")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--only", nargs="*", help="subset of preset names")
    args = ap.parse_args()

    names = args.only or preset_names()
    for name in names:
        config = load_preset(name)
        t0 = time.perf_counter()
        run(config, out=f"{args.out}/{name}", workers=args.workers, name=name)
        print(f"{name}: done in {time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
