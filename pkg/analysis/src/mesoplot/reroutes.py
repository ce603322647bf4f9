"""Temporal reroute activity: accepted reroutes per hour from the reroute log CSV."""

from __future__ import annotations

import sys

import matplotlib.pyplot as plt

from .common import io_parser, read_rows, render


def hourly_counts(rows: list[dict]) -> tuple[list[int], list[int]]:
    switched = [float(r["time_s"]) for r in rows if r["decision"] == "switch"]
    last = int(max(switched) // 3600) if switched else 0
    hours = list(range(last + 1))
    counts = [0] * len(hours)
    for t in switched:
        counts[int(t // 3600)] += 1
    return hours, counts


def build_figure(rows: list[dict]):
    hours, counts = hourly_counts(rows)
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    bars = ax.bar(hours, counts, width=0.9, color="tab:orange")
    ax.set_xlabel("hour of day")
    ax.set_ylabel("accepted reroutes")
    fig.tight_layout()
    return fig, bars


def main(argv=None) -> int:
    p = io_parser("Render the reroutes-per-hour histogram from a reroute log CSV")
    args = p.parse_args(argv)

    def build(args):
        return build_figure(read_rows(args.inp, ["time_s", "decision"]))

    return render(build, args)


if __name__ == "__main__":
    sys.exit(main())
