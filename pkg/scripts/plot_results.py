#!/usr/bin/env python3
"""Quick-look plots from a run directory (trace.csv / snapshots.csv / scatter.csv).

Usage: python scripts/plot_results.py RUN_DIR [RUN_DIR ...] [--save]
Purely a viewing aid; no analysis happens here.
"""

import argparse
import json
from pathlib import Path

import numpy as np

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load_csv(path):
    with open(path) as fh:
        lines = [l for l in fh.read().splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    rows = [l.split(",") for l in lines[1:]]
    cols = {}
    for i, name in enumerate(header):
        vals = []
        for r in rows:
            try:
                vals.append(float(r[i]))
            except ValueError:
                vals.append(np.nan)
        cols[name] = np.array(vals)
    return cols


def plot_run(run_dir: Path, save: bool):
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    title = run_dir.name
    trace = run_dir / "trace.csv"
    if trace.exists():
        c = load_csv(trace)
        axes[0].plot(c["t"], c["P_total"])
        axes[0].set_xlabel("t (1/kappa)")
        axes[0].set_ylabel("total probability")
        axes[0].set_title(f"{title}: P(t)")
    snaps = run_dir / "snapshots.csv"
    if snaps.exists() and snaps.stat().st_size > 40:
        c = load_csv(snaps)
        for t in np.unique(c["t"]):
            sel = c["t"] == t
            axes[1].plot(c["j"][sel], c["P"][sel], label=f"t={t:g}")
        axes[1].set_xlabel("site j")
        axes[1].set_ylabel("P(j)")
        axes[1].legend()
        axes[1].set_title(f"{title}: profiles")
    scatter = run_dir / "scatter.csv"
    if scatter.exists():
        c = load_csv(scatter)
        x = c.get("gamma", c.get("k"))
        axes[1].plot(x, c["R"])
        axes[1].set_yscale("log")
        axes[1].set_xlabel("gamma" if "gamma" in c else "k")
        axes[1].set_ylabel("R")
        axes[1].set_title(f"{title}: reflection")
    summary = run_dir / "summary.json"
    if summary.exists():
        print(f"{title}:", json.dumps(json.loads(summary.read_text()))[:200])
    fig.tight_layout()
    if save:
        out = run_dir / "quicklook.png"
        fig.savefig(out, dpi=150)
        print("wrote", out)
    plt.close(fig)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("run_dirs", nargs="+")
    ap.add_argument("--save", action="store_true", default=True)
    args = ap.parse_args()
    for d in args.run_dirs:
        plot_run(Path(d), args.save)


if __name__ == "__main__":
    main()
