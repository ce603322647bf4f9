"""Mesoscopic actor-based traffic simulator with dynamic rerouting."""

from .control import ControllerActor, RerouteParams
from .demand import TripLeg, load_trips, random_trips
from .engine import CommitStats, SequentialEngine, SimulationError, TimeWarpEngine
from .events import Event, EventKey
from .linkmodel import LinkActor, VdfParams
from .metrics import AuditError, RunMetrics, compare_series
from .network import Graph, Link, Node, load_network, make_grid
from .partition import Partition, partition_graph
from .routing import dijkstra, lexmin_shortest_path
from .scenario import RunConfig, RunResult, run_scenario, write_outputs
from .vehicle import Vehicle

__all__ = [
    "AuditError",
    "CommitStats",
    "ControllerActor",
    "Event",
    "EventKey",
    "Graph",
    "Link",
    "LinkActor",
    "Node",
    "Partition",
    "RerouteParams",
    "RunConfig",
    "RunMetrics",
    "RunResult",
    "SequentialEngine",
    "SimulationError",
    "TimeWarpEngine",
    "TripLeg",
    "VdfParams",
    "Vehicle",
    "compare_series",
    "dijkstra",
    "lexmin_shortest_path",
    "load_network",
    "load_trips",
    "make_grid",
    "partition_graph",
    "random_trips",
    "run_scenario",
    "write_outputs",
]

__version__ = "1.0.0"
