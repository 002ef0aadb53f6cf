#!/usr/bin/env python3
"""Render experiment CSVs into satisfaction-fraction figures.

Input is the experiment harness CSV with columns
``model,p,phi,g,alpha,dim,n,m,k,axiom,satisfied,total``; this script reads
nothing else from the primary package.  The ``approval`` family produces
one image per (model, p) pair - four panels per culture when the standard
four p values are present - with the culture parameter (phi or alpha) on
the x-axis and one line per axiom.  The ``ranked`` family produces a single
2x2 panel figure over the mallows/urn/sphere/cube cultures.

Rendering is a pure function of the CSV: fixed style, fixed ordering, no
timestamps, so identical input yields byte-identical images.

Usage: render.py --csv FILE --family {approval|ranked} --out DIR
"""

import argparse
import csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

REQUIRED_COLUMNS = [
    "model",
    "p",
    "phi",
    "g",
    "alpha",
    "dim",
    "n",
    "m",
    "k",
    "axiom",
    "satisfied",
    "total",
]

X_AXIS = {
    "resampling": "phi",
    "disjoint": "phi",
    "noise": "phi",
    "truncated_urn": "alpha",
    "mallows": "phi",
    "urn": "alpha",
    "sphere": "dim",
    "cube": "dim",
}

RANKED_PANELS = ["mallows", "urn", "sphere", "cube"]

AXIOM_STYLE = {
    "pjr": ("#1f77b4", "o"),
    "pjr+": ("#2ca02c", "s"),
    "ejr": ("#ff7f0e", "^"),
    "ejr+": ("#d62728", "d"),
    "psc": ("#1f77b4", "o"),
    "rank-pjr+": ("#2ca02c", "s"),
    "rank-ejr+": ("#d62728", "d"),
}

AXIOM_ORDER = ["pjr", "ejr", "pjr+", "ejr+", "psc", "rank-pjr+", "rank-ejr+"]


class RenderError(Exception):
    pass


def load_rows(path):
    """Parsed CSV rows; raises RenderError naming any missing column."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in REQUIRED_COLUMNS:
            if column not in header:
                raise RenderError(f"input CSV is missing the column {column!r}")
        rows = []
        for raw in reader:
            if raw["satisfied"] == "skipped":
                continue
            rows.append(
                {
                    "model": raw["model"],
                    "p": raw["p"],
                    "phi": raw["phi"],
                    "alpha": raw["alpha"],
                    "dim": raw["dim"],
                    "axiom": raw["axiom"],
                    "fraction": int(raw["satisfied"]) / int(raw["total"]),
                }
            )
    return rows


def _series(rows, x_name):
    """{axiom: (xs, fractions)} with deterministic ordering."""
    by_axiom = defaultdict(dict)
    for row in rows:
        by_axiom[row["axiom"]][float(row[x_name])] = row["fraction"]
    series = {}
    for axiom in sorted(by_axiom, key=lambda a: (AXIOM_ORDER.index(a) if a in AXIOM_ORDER else 99, a)):
        points = sorted(by_axiom[axiom].items())
        series[axiom] = ([x for x, _ in points], [y for _, y in points])
    return series


def _draw_panel(ax, rows, x_name, title):
    for axiom, (xs, ys) in _series(rows, x_name).items():
        color, marker = AXIOM_STYLE.get(axiom, ("#7f7f7f", "x"))
        ax.plot(xs, ys, label=axiom, color=color, marker=marker, markersize=3)
    ax.set_xlabel(x_name)
    ax.set_ylabel("fraction of committees satisfying")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)


def render_approval(rows, out_dir: Path):
    """One image per (model, p): lines per axiom against the culture knob."""
    groups = defaultdict(list)
    for row in rows:
        groups[(row["model"], row["p"])].append(row)
    written = []
    for model, p in sorted(groups):
        x_name = X_AXIS.get(model, "phi")
        fig, ax = plt.subplots(figsize=(4.2, 3.2), constrained_layout=True)
        _draw_panel(ax, groups[(model, p)], x_name, f"{model}, p={p}")
        path = out_dir / f"{model}_p{p}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written


def build_ranked_figure(rows):
    """2x2 panel figure over the ranking cultures present in the rows."""
    by_model = defaultdict(list)
    for row in rows:
        by_model[row["model"]].append(row)
    fig, axes = plt.subplots(2, 2, figsize=(8.4, 6.4), constrained_layout=True)
    for ax, model in zip(axes.ravel(), RANKED_PANELS):
        if by_model.get(model):
            _draw_panel(ax, by_model[model], X_AXIS[model], model)
            if X_AXIS[model] == "dim":
                ax.set_xscale("log")
        else:
            ax.set_axis_off()
    return fig


def render_ranked(rows, out_dir: Path):
    fig = build_ranked_figure(rows)
    path = out_dir / "ranked.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--csv", required=True)
    parser.add_argument("--family", required=True, choices=["approval", "ranked"])
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    try:
        rows = load_rows(args.csv)
    except (OSError, ValueError, RenderError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not rows:
        print("warning: no usable rows in the CSV; nothing rendered", file=sys.stderr)
        return 0
    if args.family == "approval":
        written = render_approval(rows, out_dir)
    else:
        written = render_ranked(rows, out_dir)
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
