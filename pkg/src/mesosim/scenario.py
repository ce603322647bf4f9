"""Scenario assembly and execution: config -> graph + demand + actors ->
engine run -> metrics, audits, and output files."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields

from . import demand, metrics as metrics_mod
from .control import ControllerActor, RerouteParams, make_controllers
from .engine import SequentialEngine, SimulationError, TimeWarpEngine, event_log_rows
from .events import VehicleArrival, initial_event
from .linkmodel import LinkActor, VdfParams, headway_us
from .network import Graph, load_network, make_grid
from .partition import Partition, partition_graph
from .timebase import to_us


@dataclass
class RunConfig:
    # network: either file paths or a synthetic grid
    nodes_path: str = ""
    links_path: str = ""
    signals_path: str = ""
    grid_rows: int = 0
    grid_cols: int = 0
    block_m: float = 200.0
    grid_profile: str = "default"
    # demand: either a trips file or a generated fixture
    trips_path: str = ""
    gen_trips: int = 0
    depart_lo_s: float = 0.0
    depart_hi_s: float = 1800.0
    od_split: float = 0.5
    penetration: float = 0.5
    # rerouting parameters (Table-style nominal defaults)
    t_lsu_s: float = 60.0
    r_lsu: float = 1.0
    t_check_s: float = 300.0
    t_delay_s: float = 120.0
    r_delay: float = 0.2
    heartbeat_s: float = 600.0
    lsu_full: bool = True
    # congestion model
    vdf_alpha: float = 0.15
    vdf_beta: float = 4.0
    flow_window_s: float = 300.0
    sat_rate_vphpl: float = 1800.0
    # engine
    mode: str = "sequential"  # or "parallel"
    workers: int = 1
    partitions: int = 4
    gvt_interval_s: float = 5.0
    batch: int = 16
    seed: int = 42
    end_time_s: float = 86400.0
    distance_unit: str = "mi"
    event_log: bool = False
    out_dir: str = ""

    def reroute_params(self) -> RerouteParams:
        return RerouteParams(
            self.t_lsu_s, self.r_lsu, self.t_check_s, self.t_delay_s, self.r_delay, self.heartbeat_s
        )

    def vdf_params(self) -> VdfParams:
        return VdfParams(self.vdf_alpha, self.vdf_beta, self.flow_window_s, self.sat_rate_vphpl)

    def echo(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def validate(self) -> None:
        if not 0.0 <= self.penetration <= 1.0:
            raise ValueError("penetration must be in [0, 1]")
        if self.mode not in ("sequential", "parallel"):
            raise ValueError(f"unknown engine mode {self.mode!r}")
        if self.workers < 1 or self.partitions < 1:
            raise ValueError("workers and partitions must be >= 1")
        if not (self.grid_rows and self.grid_cols) and not (self.nodes_path and self.links_path):
            raise ValueError("either a grid spec or nodes/links paths are required")
        if not self.trips_path and not self.gen_trips:
            raise ValueError("either a trips file or a generated trip count is required")
        for p in (self.nodes_path, self.links_path, self.signals_path, self.trips_path):
            if p and not os.path.exists(p):
                raise ValueError(f"input file does not exist: {p}")


@dataclass
class RunResult:
    config: RunConfig
    graph: Graph
    partition: Partition
    metrics: metrics_mod.RunMetrics
    audit: list
    event_log: list
    committed_by_actor: dict
    loaded_legs: int
    gridlocked: bool = False


def build_graph(cfg: RunConfig) -> Graph:
    if cfg.grid_rows and cfg.grid_cols:
        return make_grid(cfg.grid_rows, cfg.grid_cols, cfg.block_m, cfg.grid_profile)
    return load_network(cfg.nodes_path, cfg.links_path, cfg.signals_path or None)


def build_demand(cfg: RunConfig, graph: Graph):
    if cfg.trips_path:
        legs = demand.load_trips(cfg.trips_path, graph)
    else:
        legs = demand.random_trips(
            graph, cfg.gen_trips, cfg.seed, cfg.depart_lo_s, cfg.depart_hi_s, cfg.od_split
        )
    legs = demand.assign_reroutable(legs, cfg.penetration, cfg.seed)
    vehicles, dropped = demand.build_vehicles(legs, graph)
    return legs, vehicles, dropped


def route_load_weights(vehicles) -> dict[int, float]:
    """Expected per-link event load from the freespeed pre-routing pass."""
    weights: dict[int, float] = {}
    for v in vehicles:
        for lid in v.path:
            weights[lid] = weights.get(lid, 0.0) + 1.0
    return weights


def build_actors(cfg: RunConfig, graph: Graph, partition: Partition):
    base_id = max(graph.links) + 1
    params = cfg.reroute_params()
    vdf = cfg.vdf_params()
    controllers = make_controllers(partition.parts, graph, params, base_id)
    controller_ids = tuple(sorted(c.actor_id for c in controllers.values()))
    link_actors = {}
    for lid, link in graph.links.items():
        home = base_id + partition.part_of[lid]
        link_actors[lid] = LinkActor(
            link,
            controller_ids,
            home,
            vdf,
            params.t_check_us,
            params.t_lsu_us,
            params.r_lsu,
            params.heartbeat_us,
            cfg.lsu_full,
        )
    actors = dict(link_actors)
    for ctrl in controllers.values():
        actors[ctrl.actor_id] = ctrl
    worker_of = {lid: partition.part_of[lid] for lid in graph.links}
    for p, ctrl in controllers.items():
        worker_of[ctrl.actor_id] = p
    return actors, link_actors, controllers, worker_of


def run_scenario(cfg: RunConfig) -> RunResult:
    cfg.validate()
    graph = build_graph(cfg)
    legs, vehicles, dropped = build_demand(cfg, graph)
    partition = partition_graph(graph, cfg.partitions, route_load_weights(vehicles) or None)
    actors, link_actors, controllers, worker_of = build_actors(cfg, graph, partition)

    initial = [
        initial_event(v.depart_us, i, v.path[0], VehicleArrival(v, admitted=False))
        for i, v in enumerate(vehicles)
    ]
    end_us = to_us(cfg.end_time_s)
    if cfg.mode == "sequential":
        engine = SequentialEngine(actors)
        stats = engine.run(initial, end_us)
    else:
        engine = TimeWarpEngine(
            actors, worker_of, cfg.workers, to_us(cfg.gvt_interval_s), cfg.batch
        )
        stats = engine.run(initial, end_us)
        engine.finalize()

    gridlocked = engine.beyond_horizon == 0 and any(
        a.waiting_start < len(a.waiting) for a in link_actors.values()
    )

    reroutable_legs = sum(1 for v in vehicles if v.reroutable)
    m = metrics_mod.collect_metrics(
        list(link_actors.values()),
        list(controllers.values()),
        stats,
        injected=len(vehicles),
        dropped=dropped,
        reroutable_legs=reroutable_legs,
        end_time_us=end_us,
        audit=engine.audit,
        distance_unit=cfg.distance_unit,
        gridlocked=gridlocked,
    )

    caps = {lid: link.storage_cap for lid, link in graph.links.items()}
    headways = {lid: headway_us(link.lanes, cfg.sat_rate_vphpl) for lid, link in graph.links.items()}
    metrics_mod.audit_occupancy(engine.audit, caps)
    metrics_mod.audit_headways(engine.audit, headways)
    metrics_mod.audit_stage_sums(engine.audit)
    metrics_mod.audit_conservation(m, loaded=len(legs))

    return RunResult(
        cfg,
        graph,
        partition,
        m,
        engine.audit,
        list(event_log_rows(engine.event_log)) if cfg.event_log else [],
        engine.committed_by_actor(),
        loaded_legs=len(legs),
        gridlocked=gridlocked,
    )


def write_outputs(result: RunResult, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    m = result.metrics
    metrics_mod.write_summary(os.path.join(out_dir, "summary.txt"), result.config.echo(), m)
    metrics_mod.write_trips_csv(os.path.join(out_dir, "trips.csv"), m)
    metrics_mod.write_link_bins_csv(os.path.join(out_dir, "link_bins.csv"), m)
    metrics_mod.write_reroute_log_csv(os.path.join(out_dir, "reroutes.csv"), m)
    if result.config.event_log:
        with open(os.path.join(out_dir, "events.csv"), "w") as f:
            f.write("time_us,priority,seq,dest_actor,payload_kind\n")
            for row in result.event_log:
                f.write(row + "\n")
