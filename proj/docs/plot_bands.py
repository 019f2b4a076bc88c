#!/usr/bin/env python3
"""Plot a bands CSV written by `tbg bands`.

usage: plot_bands.py bands.csv [out.png]
"""
import csv
import math
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    header, body = rows[0], rows[1:]
    nb = len(header) - 3
    ks = [(float(r[1]), float(r[2])) for r in body]
    bands = [[float(r[3 + j]) for r in body] for j in range(nb)]
    return ks, bands


def arc_length(ks):
    s = [0.0]
    for (x0, y0), (x1, y1) in zip(ks, ks[1:]):
        s.append(s[-1] + math.hypot(x1 - x0, y1 - y0))
    return s


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    ks, bands = load(sys.argv[1])
    s = arc_length(ks)
    fig, ax = plt.subplots(figsize=(5, 4))
    for e in bands:
        ax.plot(s, e, lw=1.2)
    ax.set_xlim(s[0], s[-1])
    ax.set_xlabel("path length")
    ax.set_ylabel("E")
    fig.tight_layout()
    out = sys.argv[2] if len(sys.argv) > 2 else "bands.png"
    fig.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    main()
