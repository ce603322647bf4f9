"""Load-weighted recursive coordinate bisection over link midpoints."""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .network import Graph


class PartitionError(Exception):
    pass


@dataclass
class Partition:
    part_of: dict[int, int]  # link id -> partition id
    parts: int

    def loads(self, weights: dict[int, float]) -> list[float]:
        out = [0.0] * self.parts
        for lid, part in self.part_of.items():
            out[part] += weights.get(lid, 0.0)
        return out


def partition_graph(graph: Graph, parts: int, weights: dict[int, float] | None = None) -> Partition:
    if parts < 1:
        raise PartitionError("parts must be >= 1")
    if parts > len(graph.links):
        raise PartitionError(f"parts ({parts}) exceeds link count ({len(graph.links)})")
    if weights is None:
        weights = {lid: 1.0 for lid in graph.links}
    if any(w < 0 for w in weights.values()):
        raise PartitionError("negative load weight")

    items = []
    for lid in sorted(graph.links):
        link = graph.links[lid]
        a, b = graph.nodes[link.frm], graph.nodes[link.to]
        items.append((lid, (a.x + b.x) / 2, (a.y + b.y) / 2, weights.get(lid, 0.0)))

    part_of: dict[int, int] = {}
    _bisect(items, 0, parts, part_of)
    return Partition(part_of, parts)


def _bisect(items, base: int, parts: int, out: dict[int, int]) -> None:
    if parts == 1:
        for lid, _, _, _ in items:
            out[lid] = base
        return
    k1 = parts // 2
    xs = [it[1] for it in items]
    ys = [it[2] for it in items]
    axis = 1 if (max(xs) - min(xs)) >= (max(ys) - min(ys)) else 2
    items = sorted(items, key=lambda it: (it[axis], it[0]))
    total = sum(it[3] for it in items)
    target = total * k1 / parts
    # split index keeping both sides populated enough for their sub-part counts
    acc = 0.0
    best_i, best_err = k1, float("inf")
    for i in range(k1, len(items) - (parts - k1) + 1):
        acc = sum(it[3] for it in items[:i]) if i == k1 else acc + items[i - 1][3]
        err = abs(acc - target)
        if err < best_err:
            best_err, best_i = err, i
    _bisect(items[:best_i], base, k1, out)
    _bisect(items[best_i:], base + k1, parts - k1, out)


def write_partition(partition: Partition, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["link_id", "part"])
        for lid in sorted(partition.part_of):
            w.writerow([lid, partition.part_of[lid]])


def read_partition(path) -> Partition:
    part_of: dict[int, int] = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            part_of[int(row["link_id"])] = int(row["part"])
    return Partition(part_of, max(part_of.values()) + 1 if part_of else 1)
