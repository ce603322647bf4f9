"""Vehicle controller actors: network-wide congestion knowledge from
threshold-gated link status updates, reroute decisions, and a shortest-path
backend with batched weight recustomization."""

from __future__ import annotations

from dataclasses import dataclass

from .engine import Actor, Context, SimulationError
from .events import Event, LinkStatusUpdate, RerouteCheckRequest, RerouteCheckResponse
from .network import Graph
from .routing import dijkstra
from .timebase import to_us


@dataclass(frozen=True)
class RerouteParams:
    t_lsu_s: float = 60.0
    r_lsu: float = 1.0
    t_check_s: float = 300.0
    t_delay_s: float = 120.0
    r_delay: float = 0.2
    heartbeat_s: float = 600.0

    def __post_init__(self):
        for name in ("t_lsu_s", "r_lsu", "t_check_s", "t_delay_s", "r_delay", "heartbeat_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def t_lsu_us(self) -> int:
        return to_us(self.t_lsu_s)

    @property
    def t_check_us(self) -> int:
        return to_us(self.t_check_s)

    @property
    def t_delay_us(self) -> int:
        return to_us(self.t_delay_s)

    @property
    def heartbeat_us(self) -> int:
        return to_us(self.heartbeat_s)

    @property
    def purge_age_us(self) -> int:
        # congestion entries older than two heartbeat periods fall back to freespeed
        return 2 * self.heartbeat_us


class ControllerActor(Actor):
    """One controller per network partition; services reroute checks from
    vehicles currently inside that partition, with knowledge of the whole
    network."""

    def __init__(self, actor_id: int, part: int, graph: Graph, params: RerouteParams):
        super().__init__(actor_id)
        self.part = part
        self.graph = graph
        self.params = params
        self._tf = {lid: link.tf_us for lid, link in graph.links.items()}

        # snapshot-covered state
        self.congestion: dict[int, tuple[int, int]] = {}  # link -> (tc_us, updated_us)
        self.dirty: set[int] = set()
        self.weights_cache: dict[int, int] | None = None  # never mutated once built
        self.customizations = 0
        self.checks = 0
        self.lsus_received = 0
        self.unreachable_checks = 0

    def snapshot(self):
        return (
            self.snd_count,
            dict(self.congestion),
            set(self.dirty),
            self.weights_cache,
            self.customizations,
            self.checks,
            self.lsus_received,
            self.unreachable_checks,
        )

    def restore(self, snap):
        (
            self.snd_count,
            congestion,
            dirty,
            self.weights_cache,
            self.customizations,
            self.checks,
            self.lsus_received,
            self.unreachable_checks,
        ) = snap
        self.congestion = dict(congestion)
        self.dirty = set(dirty)

    def handle(self, event: Event, ctx: Context) -> None:
        payload = event.payload
        if isinstance(payload, LinkStatusUpdate):
            self.lsus_received += 1
            self.congestion[payload.link_id] = (payload.tc_us, ctx.now_us)
            self.dirty.add(payload.link_id)
        elif isinstance(payload, RerouteCheckRequest):
            self._on_check(payload, ctx)
        else:
            raise SimulationError(f"controller {self.actor_id}: unexpected payload {event.kind}")

    # -- congestion knowledge -----------------------------------------------

    def effective_weight(self, link_id: int, now_us: int) -> int:
        """Current traversal-time belief: last report while fresh, else freespeed."""
        tf = self._tf[link_id]
        ent = self.congestion.get(link_id)
        if ent is not None and now_us - ent[1] <= self.params.purge_age_us:
            return max(ent[0], tf)
        return tf

    def path_cost_us(self, links, now_us: int) -> int:
        return sum(self.effective_weight(lid, now_us) for lid in links)

    def route_query(self, from_node: int, to_node: int, now_us: int):
        """Shortest path under current knowledge, recustomizing only if any
        link weight changed since the previous query."""
        if self.weights_cache is None or self.dirty:
            self.weights_cache = {
                lid: self.effective_weight(lid, now_us) for lid in self.graph.links
            }
            self.dirty.clear()
            self.customizations += 1
        return dijkstra(self.graph, self.weights_cache, from_node, to_node)

    # -- reroute decisions ----------------------------------------------------

    def _on_check(self, req: RerouteCheckRequest, ctx: Context) -> None:
        if not req.remainder:
            raise SimulationError("reroute check with empty path remainder")
        self.checks += 1
        now = ctx.now_us
        p = self.params
        tc_p = self.path_cost_us(req.remainder, now)
        tf_p = sum(self._tf[lid] for lid in req.remainder)
        delay = tc_p - tf_p
        decision = "keep"
        new_tail = None
        new_cost = tc_p
        if delay > max(p.t_delay_us, int(round(p.r_delay * tf_p))):
            routed = self.route_query(req.start_node, req.dest, now)
            if routed is None:
                self.unreachable_checks += 1
            else:
                cost, path = routed
                if tc_p - cost > max(p.t_delay_us, int(round(p.r_delay * tc_p))):
                    decision = "switch"
                    new_tail = path
                    new_cost = cost
        ctx.log(("rr", req.vehicle_id, self.actor_id, decision, tc_p, new_cost))
        ctx.send(req.link_id, now, RerouteCheckResponse(req.vehicle_id, new_tail, tc_p, new_cost))


def make_controllers(
    parts: int, graph: Graph, params: RerouteParams, base_id: int
) -> dict[int, ControllerActor]:
    """One controller per partition, keyed by partition id."""
    return {p: ControllerActor(base_id + p, p, graph, params) for p in range(parts)}
