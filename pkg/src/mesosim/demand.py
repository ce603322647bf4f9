"""Trip demand: loading, zone expansion, reroutable assignment, initial routes."""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, replace

from .network import Graph
from .routing import freespeed_weights, lexmin_shortest_path
from .timebase import to_us
from .vehicle import Vehicle


class DemandError(Exception):
    pass


@dataclass(frozen=True)
class TripLeg:
    id: int
    origin: int
    dest: int
    depart_us: int
    reroutable: bool | None = None  # None = decide via penetration rate


@dataclass(frozen=True)
class ZoneDemand:
    o_zone: int
    d_zone: int
    depart_us: int
    count: int


def load_trips(path, graph: Graph) -> list[TripLeg]:
    legs: list[TripLeg] = []
    with open(path, newline="") as f:
        for i, row in enumerate(csv.DictReader(f), start=2):
            try:
                leg = TripLeg(
                    int(row["id"]),
                    int(row["origin_node"]),
                    int(row["dest_node"]),
                    to_us(float(row["depart_s"])),
                    None if row["reroutable"].strip() == "auto" else row["reroutable"].strip() == "1",
                )
            except (KeyError, ValueError) as e:
                raise DemandError(f"trips row {i}: {e}") from e
            if leg.origin not in graph.nodes or leg.dest not in graph.nodes:
                raise DemandError(f"trips row {i}: unknown node id")
            if leg.origin == leg.dest:
                raise DemandError(f"trips row {i}: origin equals destination")
            if leg.depart_us < 0:
                raise DemandError(f"trips row {i}: negative departure time")
            legs.append(leg)
    return legs


def save_trips(legs, path) -> None:
    from .timebase import fmt_s

    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "origin_node", "dest_node", "depart_s", "reroutable"])
        for leg in legs:
            flag = "auto" if leg.reroutable is None else int(leg.reroutable)
            w.writerow([leg.id, leg.origin, leg.dest, fmt_s(leg.depart_us), flag])


def _eligible_nodes(graph: Graph, members: list[int]) -> list[tuple[int, float]]:
    """Zone nodes usable as trip endpoints: positive weight, not freeway/ramp-only."""
    out = []
    for nid in sorted(members):
        node = graph.nodes[nid]
        if node.pop_weight <= 0:
            continue
        incident = graph.out_links.get(nid, ()) + graph.in_links.get(nid, ())
        if any(graph.links[lid].fclass > 2 for lid in incident):
            out.append((nid, node.pop_weight))
    return out


def load_zone_demand(path) -> list[ZoneDemand]:
    out = []
    with open(path, newline="") as f:
        for i, row in enumerate(csv.DictReader(f), start=2):
            try:
                zd = ZoneDemand(int(row["o_zone"]), int(row["d_zone"]), to_us(float(row["depart_s"])), int(row["count"]))
            except (KeyError, ValueError) as e:
                raise DemandError(f"zone demand row {i}: {e}") from e
            if zd.count < 1:
                raise DemandError(f"zone demand row {i}: count must be >= 1")
            out.append(zd)
    return out


def load_zone_membership(path) -> dict[int, list[int]]:
    zones: dict[int, list[int]] = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            zones.setdefault(int(row["zone"]), []).append(int(row["node"]))
    return zones


def expand_zones(
    demand: list[ZoneDemand],
    membership: dict[int, list[int]],
    graph: Graph,
    seed: int,
) -> list[TripLeg]:
    """Expand zone-to-zone counts into node-level trip legs.

    Endpoints are drawn independently with probability proportional to node
    population weight among eligible nodes; deterministic given the seed.
    """
    rng = random.Random(seed)
    eligible: dict[int, list[tuple[int, float]]] = {}
    for zd in demand:
        for zone in (zd.o_zone, zd.d_zone):
            if zone not in eligible:
                if zone not in membership:
                    raise DemandError(f"zone {zone} has no member nodes")
                eligible[zone] = _eligible_nodes(graph, membership[zone])
                if not eligible[zone]:
                    raise DemandError(f"zone {zone} has no eligible node")
    legs: list[TripLeg] = []
    next_id = 0
    for zd in demand:
        o_nodes, o_w = zip(*eligible[zd.o_zone])
        d_nodes, d_w = zip(*eligible[zd.d_zone])
        for _ in range(zd.count):
            o = rng.choices(o_nodes, weights=o_w)[0]
            d = rng.choices(d_nodes, weights=d_w)[0]
            tries = 0
            while d == o:
                if len(d_nodes) == 1:
                    break
                d = rng.choices(d_nodes, weights=d_w)[0]
                tries += 1
                if tries > 100:
                    break
            if d == o:
                continue  # degenerate zone pair; dropped
            legs.append(TripLeg(next_id, o, d, zd.depart_us))
            next_id += 1
    return legs


def assign_reroutable(legs: list[TripLeg], penetration: float, seed: int) -> list[TripLeg]:
    """Flag exactly round(p * N) of the auto legs as reroutable (seeded shuffle)."""
    if not 0.0 <= penetration <= 1.0:
        raise DemandError("penetration rate must be in [0, 1]")
    auto_idx = [i for i, leg in enumerate(legs) if leg.reroutable is None]
    n_flag = round(penetration * len(auto_idx))
    rng = random.Random(seed)
    shuffled = list(auto_idx)
    rng.shuffle(shuffled)
    chosen = set(shuffled[:n_flag])
    return [
        replace(leg, reroutable=(i in chosen)) if leg.reroutable is None else leg
        for i, leg in enumerate(legs)
    ]


def initial_route(leg: TripLeg, graph: Graph, weights: dict[int, int] | None = None):
    """Freespeed shortest path, ties broken lexicographically by link ids."""
    if weights is None:
        weights = freespeed_weights(graph)
    return lexmin_shortest_path(graph, weights, leg.origin, leg.dest)


def build_vehicles(legs: list[TripLeg], graph: Graph):
    """Route all legs; returns (vehicles, dropped_unreachable)."""
    weights = freespeed_weights(graph)
    vehicles: list[Vehicle] = []
    dropped = 0
    for leg in legs:
        routed = lexmin_shortest_path(graph, weights, leg.origin, leg.dest)
        if routed is None:
            dropped += 1
            continue
        cost_us, path = routed
        vehicles.append(
            Vehicle(
                trip_id=leg.id,
                origin=leg.origin,
                dest=leg.dest,
                depart_us=leg.depart_us,
                reroutable=bool(leg.reroutable),
                path=path,
                freespeed_us=cost_us,
            )
        )
    return vehicles, dropped


def random_trips(
    graph: Graph,
    n: int,
    seed: int,
    depart_lo_s: float = 0.0,
    depart_hi_s: float = 1800.0,
    od_split: float | None = 0.5,
) -> list[TripLeg]:
    """Synthetic demand generator for fixtures.

    With ``od_split`` set, origins are drawn from the leftmost ``od_split``
    fraction of the bounding box and destinations from the rightmost, which
    concentrates flows so the fixture actually congests; None draws both
    uniformly.
    """
    rng = random.Random(seed)
    nodes = sorted(graph.nodes)
    xs = [graph.nodes[nid].x for nid in nodes]
    span = max(xs) - min(xs)
    frac = od_split if od_split is not None else 1.0
    left = [nid for nid in nodes if graph.nodes[nid].x <= min(xs) + span * frac]
    right = [nid for nid in nodes if graph.nodes[nid].x >= max(xs) - span * frac]
    legs = []
    for i in range(n):
        if od_split is not None:
            o = rng.choice(left)
            d = rng.choice(right)
        else:
            o = rng.choice(nodes)
            d = rng.choice(nodes)
        while d == o:
            d = rng.choice(nodes)
        depart = rng.uniform(depart_lo_s, depart_hi_s)
        legs.append(TripLeg(i, o, d, to_us(depart)))
    return legs
