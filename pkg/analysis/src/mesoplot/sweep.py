"""Parameter-sensitivity panels: one line chart per metric column of a sweep CSV."""

from __future__ import annotations

import sys

import matplotlib.pyplot as plt

from .common import PlotError, io_parser, read_rows, render

DEFAULT_METRICS = ("vhd_h", "reroutes", "lsus")


def build_figure(rows: list[dict], metrics: list[str], axis_label: str = "axis value"):
    """Returns (figure, metric -> Line2D) so callers can audit the data layer."""
    xs = [float(r["axis_value"]) for r in rows]
    fig, axes = plt.subplots(1, len(metrics), figsize=(3.6 * len(metrics), 3.0))
    if len(metrics) == 1:
        axes = [axes]
    lines = {}
    for ax, metric in zip(axes, metrics):
        ys = [float(r[metric]) for r in rows]
        (lines[metric],) = ax.plot(xs, ys, marker="o")
        ax.set_xlabel(axis_label)
        ax.set_ylabel(metric)
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig, lines


def main(argv=None) -> int:
    p = io_parser("Render sensitivity-sweep line panels from a sweep CSV")
    p.add_argument("--metrics", default=",".join(DEFAULT_METRICS),
                   help="comma-separated metric columns, one panel each")
    p.add_argument("--axis-label", default="axis value")
    args = p.parse_args(argv)
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    if not metrics:
        print("error: no metric columns requested", file=sys.stderr)
        return 1

    def build(args):
        rows = read_rows(args.inp, ["axis_value", *metrics])
        return build_figure(rows, metrics, args.axis_label)

    return render(build, args)


if __name__ == "__main__":
    sys.exit(main())
