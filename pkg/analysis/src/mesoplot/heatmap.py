"""Traversal-delta heatmap: link segments drawn at node coordinates with a
diverging red/blue scale centered at zero."""

from __future__ import annotations

import sys

import matplotlib.pyplot as plt
from matplotlib.collections import LineCollection
from matplotlib.colors import Normalize

from .common import PlotError, io_parser, read_rows, render


def load_geometry(nodes_path, links_path):
    nodes = {int(r["id"]): (float(r["x"]), float(r["y"]))
             for r in read_rows(nodes_path, ["id", "x", "y"])}
    links = {int(r["id"]): (int(r["from"]), int(r["to"]))
             for r in read_rows(links_path, ["id", "from", "to"])}
    return nodes, links


def build_figure(deltas: dict[int, int], nodes: dict, links: dict):
    """Returns (figure, LineCollection); the collection's array is the audit
    surface: entry i is the delta drawn as segment i."""
    segments = []
    values = []
    for lid in sorted(deltas):
        if lid not in links:
            raise PlotError(f"delta for unknown link {lid}")
        frm, to = links[lid]
        for nid in (frm, to):
            if nid not in nodes:
                raise PlotError(f"link {lid} references unknown node {nid}")
        segments.append((nodes[frm], nodes[to]))
        values.append(deltas[lid])
    lim = max((abs(v) for v in values), default=0) or 1  # all-zero stays neutral
    lc = LineCollection(segments, cmap="bwr", norm=Normalize(-lim, lim), linewidths=2.5)
    lc.set_array(values)
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    ax.add_collection(lc)
    ax.autoscale()
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    fig.colorbar(lc, ax=ax, label="traversal count delta")
    fig.tight_layout()
    return fig, lc


def main(argv=None) -> int:
    p = io_parser("Render a traversal-delta heatmap over node coordinates")
    p.add_argument("--nodes", required=True, help="network nodes CSV")
    p.add_argument("--links", required=True, help="network links CSV")
    args = p.parse_args(argv)

    def build(args):
        deltas = {int(r["link_id"]): int(r["delta"])
                  for r in read_rows(args.inp, ["link_id", "delta"])}
        nodes, links = load_geometry(args.nodes, args.links)
        return build_figure(deltas, nodes, links)

    return render(build, args)


if __name__ == "__main__":
    sys.exit(main())
