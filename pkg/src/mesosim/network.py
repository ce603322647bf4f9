"""Road network: loading, validation, synthetic grids, and static attributes.

The graph is immutable after construction; all dynamic state lives in the
link actors.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

from .timebase import to_us

JAM_SPACING_M = 7.5  # standard jam-density spacing used to derive storage capacity


class NetworkError(Exception):
    """Invalid network input."""


@dataclass(frozen=True)
class Node:
    id: int
    x: float
    y: float
    pop_weight: float = 1.0


@dataclass(frozen=True)
class SignalPlan:
    cycle_us: int
    # maneuver (downstream link id) -> ((offset_us, duration_us, slots), ...)
    windows: tuple[tuple[int, tuple[tuple[int, int, int], ...]], ...]

    def windows_for(self, maneuver: int) -> tuple[tuple[int, int, int], ...]:
        for man, wins in self.windows:
            if man == maneuver:
                return wins
        return ()


@dataclass(frozen=True)
class Link:
    id: int
    frm: int
    to: int
    length_m: float
    lanes: int
    freespeed_mps: float
    capacity_vph: float
    fclass: int
    signalized: bool = False
    plan: SignalPlan | None = None

    @property
    def tf_s(self) -> float:
        return self.length_m / self.freespeed_mps

    @property
    def tf_us(self) -> int:
        return to_us(self.length_m / self.freespeed_mps)

    @property
    def storage_cap(self) -> int:
        return max(1, math.floor(self.length_m * self.lanes / JAM_SPACING_M))


@dataclass
class Graph:
    nodes: dict[int, Node]
    links: dict[int, Link]
    out_links: dict[int, tuple[int, ...]] = field(default_factory=dict)
    in_links: dict[int, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.out_links:
            out: dict[int, list[int]] = {n: [] for n in self.nodes}
            inc: dict[int, list[int]] = {n: [] for n in self.nodes}
            for lid in sorted(self.links):
                link = self.links[lid]
                out[link.frm].append(lid)
                inc[link.to].append(lid)
            self.out_links = {n: tuple(v) for n, v in out.items()}
            self.in_links = {n: tuple(v) for n, v in inc.items()}


def _validate_link(row_no: int, link: Link, nodes: dict[int, Node]) -> None:
    if link.frm not in nodes or link.to not in nodes:
        raise NetworkError(f"link {link.id} (row {row_no}): dangling node reference")
    if link.length_m <= 0 or link.freespeed_mps <= 0 or link.capacity_vph <= 0:
        raise NetworkError(f"link {link.id} (row {row_no}): non-positive length/speed/capacity")
    if link.lanes < 1:
        raise NetworkError(f"link {link.id} (row {row_no}): lanes must be positive")
    if not 1 <= link.fclass <= 5:
        raise NetworkError(f"link {link.id} (row {row_no}): functional class {link.fclass} out of range")


def load_network(nodes_path, links_path, signals_path=None) -> Graph:
    nodes: dict[int, Node] = {}
    with open(nodes_path, newline="") as f:
        for i, row in enumerate(csv.DictReader(f), start=2):
            try:
                node = Node(int(row["id"]), float(row["x"]), float(row["y"]), float(row["pop_weight"]))
            except (KeyError, ValueError) as e:
                raise NetworkError(f"nodes row {i}: {e}") from e
            if node.pop_weight < 0:
                raise NetworkError(f"nodes row {i}: negative pop_weight")
            nodes[node.id] = node

    plans = _load_signal_plans(signals_path) if signals_path else {}

    links: dict[int, Link] = {}
    with open(links_path, newline="") as f:
        for i, row in enumerate(csv.DictReader(f), start=2):
            try:
                lid = int(row["id"])
                link = Link(
                    lid,
                    int(row["from"]),
                    int(row["to"]),
                    float(row["length_m"]),
                    int(row["lanes"]),
                    float(row["freespeed_mps"]),
                    float(row["capacity_vph"]),
                    int(row["fclass"]),
                    row["signalized"].strip() in ("1", "true", "True"),
                    plans.get(lid),
                )
            except (KeyError, ValueError) as e:
                raise NetworkError(f"links row {i}: {e}") from e
            _validate_link(i, link, nodes)
            if link.id in links:
                raise NetworkError(f"links row {i}: duplicate link id {link.id}")
            links[link.id] = link
    return Graph(nodes, links)


def _load_signal_plans(path) -> dict[int, SignalPlan]:
    raw: dict[int, dict] = {}
    with open(path, newline="") as f:
        for i, row in enumerate(csv.DictReader(f), start=2):
            try:
                lid = int(row["link_id"])
                cycle_us = to_us(float(row["cycle_s"]))
                man = int(row["maneuver_to_link"])
                win = (to_us(float(row["green_offset_s"])), to_us(float(row["green_dur_s"])), int(row["slots"]))
            except (KeyError, ValueError) as e:
                raise NetworkError(f"signals row {i}: {e}") from e
            if win[0] < 0 or win[0] + win[1] > cycle_us:
                raise NetworkError(f"signals row {i}: green window outside cycle")
            if win[2] < 1:
                raise NetworkError(f"signals row {i}: slots must be positive")
            ent = raw.setdefault(lid, {"cycle": cycle_us, "mans": {}})
            if ent["cycle"] != cycle_us:
                raise NetworkError(f"signals row {i}: inconsistent cycle length for link {lid}")
            ent["mans"].setdefault(man, []).append(win)
    plans = {}
    for lid, ent in raw.items():
        mans = []
        for man in sorted(ent["mans"]):
            wins = sorted(ent["mans"][man])
            for (o1, d1, _), (o2, _, _) in zip(wins, wins[1:]):
                if o1 + d1 > o2:
                    raise NetworkError(f"signal plan for link {lid}: overlapping green windows")
            mans.append((man, tuple(wins)))
        plans[lid] = SignalPlan(ent["cycle"], tuple(mans))
    return plans


def save_network(graph: Graph, nodes_path, links_path) -> None:
    with open(nodes_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "x", "y", "pop_weight"])
        for nid in sorted(graph.nodes):
            n = graph.nodes[nid]
            w.writerow([n.id, repr(n.x), repr(n.y), repr(n.pop_weight)])
    with open(links_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "from", "to", "length_m", "lanes", "freespeed_mps", "capacity_vph", "fclass", "signalized"])
        for lid in sorted(graph.links):
            l = graph.links[lid]
            w.writerow(
                [l.id, l.frm, l.to, repr(l.length_m), l.lanes, repr(l.freespeed_mps), repr(l.capacity_vph), l.fclass, int(l.signalized)]
            )


GRID_PROFILES = {
    # (lanes, freespeed m/s, capacity veh/h, functional class)
    "default": {"arterial": (2, 13.9, 1200.0, 3), "local": (1, 8.33, 600.0, 5)},
    # all links identical: every monotone path between two nodes ties on
    # distance and freespeed time, so reroutes are distance-neutral
    "uniform": {"arterial": (1, 10.0, 600.0, 3), "local": (1, 10.0, 600.0, 3)},
}


def make_grid(rows: int, cols: int, block_m: float = 200.0, profile: str = "default") -> Graph:
    """Bidirectional grid: arterial attributes on the boundary ring, local roads inside."""
    if rows < 2 or cols < 2:
        raise NetworkError("grid needs rows, cols >= 2")
    preset = GRID_PROFILES[profile]
    nodes = {
        r * cols + c: Node(r * cols + c, c * block_m, r * block_m, 1.0)
        for r in range(rows)
        for c in range(cols)
    }

    def on_ring_edge(r1, c1, r2, c2) -> bool:
        if r1 == r2 and r1 in (0, rows - 1):
            return True
        if c1 == c2 and c1 in (0, cols - 1):
            return True
        return False

    links: dict[int, Link] = {}
    lid = 0
    for r in range(rows):
        for c in range(cols):
            here = r * cols + c
            for (r2, c2) in ((r, c + 1), (r + 1, c)):
                if r2 >= rows or c2 >= cols:
                    continue
                there = r2 * cols + c2
                lanes, speed, cap, fclass = preset["arterial" if on_ring_edge(r, c, r2, c2) else "local"]
                for frm, to in ((here, there), (there, here)):
                    links[lid] = Link(lid, frm, to, block_m, lanes, speed, cap, fclass)
                    lid += 1
    return Graph(nodes, links)
