"""Delay benefit curve: VHD and rerouted legs against the penetration rate,
from a penetration-axis sweep CSV."""

from __future__ import annotations

import sys

import matplotlib.pyplot as plt

from .common import io_parser, read_rows, render


def build_figure(rows: list[dict]):
    rows = sorted(rows, key=lambda r: float(r["axis_value"]))
    xs = [float(r["axis_value"]) for r in rows]
    vhd = [float(r["vhd_h"]) for r in rows]
    reroutes = [float(r["reroutes"]) for r in rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    (vhd_line,) = ax.plot(xs, vhd, marker="o", color="tab:blue", label="VHD (h)")
    ax.set_xlabel("penetration rate")
    ax.set_ylabel("vehicle hours of delay", color="tab:blue")
    ax2 = ax.twinx()
    (rr_line,) = ax2.plot(xs, reroutes, marker="s", color="tab:red", label="trip reroutes")
    ax2.set_ylabel("trip reroutes", color="tab:red")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig, {"vhd_h": vhd_line, "reroutes": rr_line}


def main(argv=None) -> int:
    p = io_parser("Render the VHD-vs-penetration curve from a sweep CSV")
    args = p.parse_args(argv)

    def build(args):
        return build_figure(read_rows(args.inp, ["axis_value", "vhd_h", "reroutes"]))

    return render(build, args)


if __name__ == "__main__":
    sys.exit(main())
