#!/usr/bin/env python3
"""Plot the CSVs written by reproduce_results.py (matplotlib required,
but only here; the package itself emits data files only).

Usage: python scripts/plot_results.py [OUTDIR]
"""

import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {key: [float(r[key]) if r[key] not in ("ok", "insufficient-data",
                                                  "true", "false")
                  else r[key] for r in rows]
            for key in rows[0]}


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "out")

    fringe = read_csv(out / "fringe" / "fringe.csv")
    fig, ax = plt.subplots()
    ax.errorbar(fringe["phi_rad"], fringe["mean_I_plus"], fringe["se_plus"],
                fmt="o-", label="I+")
    ax.errorbar(fringe["phi_rad"], fringe["mean_I_minus"], fringe["se_minus"],
                fmt="s--", label="I-")
    ax.set_xlabel("input qubit phase (rad)")
    ax.set_ylabel("mean signal")
    ax.legend()
    fig.savefig(out / "fringe.png", dpi=150)

    sweep = read_csv(out / "gain_sweep" / "gain_sweep.csv")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(sweep["g"], sweep["clones_pure"], label="pure injection")
    ax1.plot(sweep["g"], sweep["clones_mixture"], label="partial injection")
    ax1.set_yscale("log")
    ax1.set_xlabel("gain")
    ax1.set_ylabel("mean clone number")
    ax1.legend()
    ax2.plot(sweep["g"], sweep["V_th"], ":", label="ideal")
    ax2.plot(sweep["g"], sweep["V_eff"], "-", label="partial injection")
    ax2.plot(sweep["g"], sweep["V_nc"], "--", label="no coherence")
    ax2.errorbar(sweep["g"], sweep["V_simulated"], sweep["V_sim_err"],
                 fmt="o", label="simulated")
    ax2.set_xlabel("gain")
    ax2.set_ylabel("visibility")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(out / "gain_sweep.png", dpi=150)

    dist = read_csv(out / "distribution" / "phi_plus" / "dist.csv")
    fig, ax = plt.subplots()
    sc = ax.scatter(dist["n_plus"], dist["n_minus"], c=dist["probability"],
                    s=4, cmap="viridis")
    ax.set_xlim(0, 60)
    ax.set_ylim(0, 60)
    ax.set_xlabel("n+")
    ax.set_ylabel("n-")
    fig.colorbar(sc, label="probability")
    fig.savefig(out / "distribution.png", dpi=150)

    filt = read_csv(out / "filter_sweep" / "filter_sweep.csv")
    keep = [i for i, s in enumerate(filt["status"]) if s == "ok"]
    fig, ax = plt.subplots()
    ax.errorbar([filt["retained_fraction"][i] for i in keep],
                [filt["visibility"][i] for i in keep],
                [filt["visibility_err"][i] for i in keep], fmt="o-")
    ax.set_xscale("log")
    ax.set_xlabel("retained fraction")
    ax.set_ylabel("visibility")
    fig.savefig(out / "filter_sweep.png", dpi=150)
    print(f"wrote plots under {out}/")


if __name__ == "__main__":
    main()
