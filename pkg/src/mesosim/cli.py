"""Command-line entry point: run, sweep, make-grid, expand-zones, compare, diff.

Exit codes: 0 success, 1 usage error, 2 audit/invariant failure, 3 gridlock.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from dataclasses import fields

from . import demand, metrics as metrics_mod
from .engine import SimulationError
from .metrics import AuditError
from .network import NetworkError, load_network, make_grid, save_network
from .partition import partition_graph, write_partition
from .scenario import RunConfig, run_scenario, write_outputs

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_AUDIT = 2
EXIT_GRIDLOCK = 3

_BOOL_FIELDS = {"lsu_full", "event_log"}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file; CLI flags override it")
    p.add_argument("--grid", help="RxC synthetic grid, e.g. 10x10")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name in _BOOL_FIELDS:
            p.add_argument(flag, type=int, choices=(0, 1), default=None, dest=f.name)
        else:
            p.add_argument(flag, type=str, default=None, dest=f.name)


def _coerce(name: str, raw: str):
    ftype = {f.name: f.type for f in fields(RunConfig)}[name]
    if name in _BOOL_FIELDS:
        return bool(int(raw))
    if ftype == "int":
        return int(raw)
    if ftype == "float":
        return float(raw)
    return raw


def parse_config_file(path: str) -> dict:
    known = {f.name for f in fields(RunConfig)}
    out = {}
    with open(path) as f:
        for i, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{i}: expected 'key = value'")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in known:
                raise ValueError(f"{path}:{i}: unknown config key {key!r}")
            out[key] = _coerce(key, value)
    return out


def build_config(args) -> RunConfig:
    values = {}
    if args.config:
        values.update(parse_config_file(args.config))
    for f in fields(RunConfig):
        raw = getattr(args, f.name, None)
        if raw is not None:
            values[f.name] = raw if f.name in _BOOL_FIELDS else _coerce(f.name, raw)
    if getattr(args, "grid", None):
        rows, _, cols = args.grid.lower().partition("x")
        values["grid_rows"], values["grid_cols"] = int(rows), int(cols)
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def _finish_run(cfg: RunConfig, result) -> int:
    if cfg.out_dir:
        write_outputs(result, cfg.out_dir)
    for k, v in result.metrics.scalar_summary().items():
        print(f"{k} = {v}")
    if result.gridlocked:
        print("gridlock detected: storage protocol quiesced with waiting vehicles", file=sys.stderr)
        return EXIT_GRIDLOCK
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = build_config(args)
    result = run_scenario(cfg)
    return _finish_run(cfg, result)


SWEEP_AXES = ("penetration", "t_lsu", "t_check", "t_delay")


def cmd_sweep(args) -> int:
    cfg = build_config(args)
    if args.axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {args.axis!r}")
    values = [float(v) for v in args.values.split(",") if v.strip()]
    if not values:
        raise ValueError("sweep needs at least one value")
    out_dir = cfg.out_dir or "sweep_out"
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for value in values:
        run_cfg = RunConfig(**cfg.echo())
        if args.axis == "penetration":
            run_cfg.penetration = value
        elif args.axis == "t_lsu":
            run_cfg.t_lsu_s = value
            if not args.no_link:
                run_cfg.r_lsu = value / 60.0
        elif args.axis == "t_check":
            run_cfg.t_check_s = value
        elif args.axis == "t_delay":
            run_cfg.t_delay_s = value
            if not args.no_link:
                run_cfg.r_delay = value / 600.0
        run_cfg.out_dir = os.path.join(out_dir, f"{args.axis}_{value:g}")
        started = time.perf_counter()
        result = run_scenario(run_cfg)
        elapsed = time.perf_counter() - started
        write_outputs(result, run_cfg.out_dir)
        m = result.metrics
        rows.append(
            [
                f"{value:g}",
                f"{m.vhd_h:.6f}",
                f"{m.vmt:.6f}",
                m.trip_reroutes,
                m.lsus_sent,
                m.reroute_checks,
                f"{elapsed:.3f}",
            ]
        )
        # keep the combined CSV current so an aborted sweep retains partial output
        with open(os.path.join(out_dir, "sweep.csv"), "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["axis_value", "vhd_h", "vmt", "reroutes", "lsus", "checks", "runtime_s"])
            w.writerows(rows)
    return EXIT_OK


def cmd_make_grid(args) -> int:
    graph = make_grid(args.rows, args.cols, args.block, args.profile)
    save_network(graph, args.out_nodes, args.out_links)
    if args.partitions:
        part = partition_graph(graph, args.partitions)
        if not args.out_partition:
            raise ValueError("--out-partition required with --partitions")
        write_partition(part, args.out_partition)
    print(f"grid {args.rows}x{args.cols}: {len(graph.nodes)} nodes, {len(graph.links)} links")
    return EXIT_OK


def cmd_expand_zones(args) -> int:
    graph = load_network(args.nodes, args.links)
    zone_demand = demand.load_zone_demand(args.demand)
    membership = demand.load_zone_membership(args.membership)
    legs = demand.expand_zones(zone_demand, membership, graph, args.seed)
    demand.save_trips(legs, args.out)
    print(f"expanded {sum(z.count for z in zone_demand)} zone trips into {len(legs)} legs")
    return EXIT_OK


def cmd_compare(args) -> int:
    sim = metrics_mod.read_link_bins_csv(args.sim)
    ref = metrics_mod.read_reference_series_csv(args.ref)
    cmp = metrics_mod.compare_series(sim, ref)
    print(f"n = {cmp.n}")
    print(f"r2 = {'missing' if cmp.r2 is None else f'{cmp.r2:.6f}'}")
    print(f"relative_error = {'missing' if cmp.relative_error is None else f'{cmp.relative_error:.6f}'}")
    return EXIT_OK


def cmd_diff(args) -> int:
    a = metrics_mod.daily_traversals_from_bins(metrics_mod.read_link_bins_csv(args.a))
    b = metrics_mod.daily_traversals_from_bins(metrics_mod.read_link_bins_csv(args.b))
    deltas = metrics_mod.diff_traversals(a, b)
    metrics_mod.write_traversal_deltas_csv(args.out, deltas)
    print(f"wrote {len(deltas)} link deltas to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mesosim", description="Mesoscopic traffic simulator with dynamic rerouting")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one simulation")
    _add_config_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p_sweep.add_argument("--values", required=True, help="comma-separated axis values")
    p_sweep.add_argument("--no-link", action="store_true", help="do not link relative thresholds to the axis")
    p_sweep.set_defaults(func=cmd_sweep)

    p_grid = sub.add_parser("make-grid", help="write a synthetic grid network")
    p_grid.add_argument("--rows", type=int, required=True)
    p_grid.add_argument("--cols", type=int, required=True)
    p_grid.add_argument("--block", type=float, default=200.0)
    p_grid.add_argument("--profile", default="default")
    p_grid.add_argument("--out-nodes", required=True)
    p_grid.add_argument("--out-links", required=True)
    p_grid.add_argument("--partitions", type=int, default=0)
    p_grid.add_argument("--out-partition")
    p_grid.set_defaults(func=cmd_make_grid)

    p_zones = sub.add_parser("expand-zones", help="expand zone demand to node-level trips")
    p_zones.add_argument("--demand", required=True)
    p_zones.add_argument("--membership", required=True)
    p_zones.add_argument("--nodes", required=True)
    p_zones.add_argument("--links", required=True)
    p_zones.add_argument("--seed", type=int, default=42)
    p_zones.add_argument("--out", required=True)
    p_zones.set_defaults(func=cmd_expand_zones)

    p_cmp = sub.add_parser("compare", help="compare link bins against a reference series")
    p_cmp.add_argument("--sim", required=True)
    p_cmp.add_argument("--ref", required=True)
    p_cmp.set_defaults(func=cmd_compare)

    p_diff = sub.add_parser("diff", help="per-link traversal-count deltas between two runs")
    p_diff.add_argument("--a", required=True)
    p_diff.add_argument("--b", required=True)
    p_diff.add_argument("--out", required=True)
    p_diff.set_defaults(func=cmd_diff)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, NetworkError, demand.DemandError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (AuditError, SimulationError, AssertionError) as e:
        print(f"audit failure: {e}", file=sys.stderr)
        return EXIT_AUDIT


if __name__ == "__main__":
    sys.exit(main())
