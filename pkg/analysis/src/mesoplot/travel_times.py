"""Travel-time distributions: actual vs freespeed trip times from a trip log CSV."""

from __future__ import annotations

import sys

import matplotlib.pyplot as plt

from .common import io_parser, read_rows, render


def minutes(rows: list[dict]) -> tuple[list[float], list[float]]:
    actual = [(float(r["arrive_s"]) - float(r["depart_s"])) / 60.0 for r in rows]
    free = [float(r["freespeed_s"]) / 60.0 for r in rows]
    return actual, free


def build_figure(rows: list[dict], bins: int = 20):
    actual, free = minutes(rows)
    lo = min(min(actual), min(free))
    hi = max(max(actual), max(free))
    if hi == lo:
        hi = lo + 1.0
    edges = [lo + (hi - lo) * i / bins for i in range(bins + 1)]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    counts, _, _ = ax.hist(
        [actual, free], bins=edges, label=["actual", "freespeed"],
        color=["tab:blue", "tab:gray"], alpha=0.75,
    )
    ax.set_xlabel("trip travel time (min)")
    ax.set_ylabel("trips")
    ax.legend()
    fig.tight_layout()
    return fig, {"edges": edges, "actual": list(counts[0]), "freespeed": list(counts[1])}


def main(argv=None) -> int:
    p = io_parser("Render trip travel-time distributions from a trip log CSV")
    p.add_argument("--bins", type=int, default=20)
    args = p.parse_args(argv)

    def build(args):
        rows = read_rows(args.inp, ["depart_s", "arrive_s", "freespeed_s"])
        return build_figure(rows, args.bins)

    return render(build, args)


if __name__ == "__main__":
    sys.exit(main())
