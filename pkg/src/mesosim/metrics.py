"""System metrics (VHD, VMT, counts, series), audits over the committed log,
validation statistics, and the CSV surfaces other tools consume."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

from .timebase import US_PER_S, fmt_s

M_PER_MILE = 1609.344
M_PER_KM = 1000.0


class AuditError(Exception):
    """A committed-log audit found an invariant violation."""


@dataclass
class SeriesComparison:
    r2: float | None  # None when the reference has zero variance
    relative_error: float | None
    n: int


@dataclass
class RunMetrics:
    injected: int = 0
    completed: int = 0
    unfinished: int = 0
    dropped_unreachable: int = 0
    reroutable_legs: int = 0
    legs_rerouted: int = 0
    trip_reroutes: int = 0
    reroute_checks: int = 0
    lsus_sent: int = 0
    heartbeats_sent: int = 0
    customizations: int = 0
    vhd_h: float = 0.0
    residual_vhd_h: float = 0.0
    vmt: float = 0.0
    distance_unit: str = "mi"
    events_committed: int = 0
    events_rolled_back: int = 0
    gridlocked: bool = False
    trip_records: list[tuple] = field(default_factory=list)  # (id, depart, arrive, freespeed, dist, reroutes)
    link_bins: dict[tuple[int, int], tuple[int, float]] = field(default_factory=dict)
    reroute_log: list[tuple] = field(default_factory=list)  # (time_us, vid, ctrl, decision, old, new)
    traversals: dict[int, int] = field(default_factory=dict)  # link -> daily traversal count

    @property
    def commit_efficiency(self) -> float:
        total = self.events_committed + self.events_rolled_back
        return 1.0 if total == 0 else self.events_committed / total

    def scalar_summary(self) -> dict[str, object]:
        return {
            "injected_trips": self.injected,
            "completed_trips": self.completed,
            "unfinished_trips": self.unfinished,
            "dropped_unreachable": self.dropped_unreachable,
            "reroutable_legs": self.reroutable_legs,
            "legs_rerouted": self.legs_rerouted,
            "trip_reroutes": self.trip_reroutes,
            "reroute_checks": self.reroute_checks,
            "lsus_sent": self.lsus_sent,
            "heartbeats_sent": self.heartbeats_sent,
            "customizations": self.customizations,
            "vhd_h": f"{self.vhd_h:.6f}",
            "residual_vhd_h": f"{self.residual_vhd_h:.6f}",
            f"vmt_{self.distance_unit}": f"{self.vmt:.6f}",
            "events_committed": self.events_committed,
            "events_rolled_back": self.events_rolled_back,
            "commit_efficiency": f"{self.commit_efficiency:.6f}",
            "gridlocked": int(self.gridlocked),
        }


def trip_vhd_h(depart_us: int, arrive_us: int, freespeed_us: int) -> float:
    return max(0, (arrive_us - depart_us) - freespeed_us) / US_PER_S / 3600.0


def distance_factor(unit: str) -> float:
    if unit == "mi":
        return 1.0 / M_PER_MILE
    if unit == "km":
        return 1.0 / M_PER_KM
    raise ValueError(f"unknown distance unit {unit!r}")


def metrics_from_audit(audit, distance_unit: str = "mi") -> RunMetrics:
    """Independent recount: rebuild metrics from the committed audit records.

    Used as the second path of the two-path accounting check against the
    state-accumulated metrics.
    """
    m = RunMetrics(distance_unit=distance_unit)
    factor = distance_factor(distance_unit)
    for key, rec in audit:
        kind = rec[0]
        if kind == "done":
            _, trip_id, depart, arrive, free, dist, reroutes = rec
            if arrive < depart:
                raise AuditError(f"trip {trip_id}: arrival before departure")
            m.completed += 1
            m.trip_reroutes += reroutes
            if reroutes:
                m.legs_rerouted += 1
            m.vhd_h += trip_vhd_h(depart, arrive, free)
            m.vmt += dist * factor
            m.trip_records.append((trip_id, depart, arrive, free, dist, reroutes))
        elif kind == "enter":
            _, link_id = rec[:2]
            m.traversals[link_id] = m.traversals.get(link_id, 0) + 1
        elif kind == "lsu":
            if rec[3]:
                m.heartbeats_sent += 1
            else:
                m.lsus_sent += 1
        elif kind == "rr":
            m.reroute_log.append((key.time_us,) + rec[1:])
            m.reroute_checks += 1
    m.trip_records.sort()
    return m


def collect_metrics(link_actors, controllers, stats, injected: int, dropped: int,
                    reroutable_legs: int, end_time_us: int, audit,
                    distance_unit: str = "mi", gridlocked: bool = False) -> RunMetrics:
    """Accumulate run metrics from final committed actor states."""
    m = RunMetrics(distance_unit=distance_unit)
    factor = distance_factor(distance_unit)
    m.injected = injected
    m.dropped_unreachable = dropped
    m.reroutable_legs = reroutable_legs
    m.events_committed = stats.committed
    m.events_rolled_back = stats.rolled_back
    m.gridlocked = gridlocked
    started: set[int] = set()
    for actor in link_actors:
        m.lsus_sent += actor.lsus_sent
        m.heartbeats_sent += actor.heartbeats_sent
        for rec in actor.completed:
            trip_id, depart, arrive, free, dist, reroutes = rec
            if arrive < depart:
                raise AuditError(f"trip {trip_id}: arrival before departure")
            m.completed += 1
            m.trip_reroutes += reroutes
            if reroutes:
                m.legs_rerouted += 1
            m.vhd_h += trip_vhd_h(depart, arrive, free)
            m.vmt += dist * factor
            m.trip_records.append(rec)
        for bin_idx, (count, speed_sum, speed_n) in actor.bins.items():
            mean = speed_sum / speed_n if speed_n else 0.0
            m.link_bins[(actor.link.id, bin_idx)] = (count, mean)
        m.traversals[actor.link.id] = actor.traversal_count
        for rec in actor.active.values():
            started.add(rec.vehicle.trip_id)
            m.residual_vhd_h += max(0, end_time_us - rec.vehicle.depart_us) / US_PER_S / 3600.0
        for entry in actor.waiting[actor.waiting_start :]:
            if entry[0] == "start":
                started.add(entry[1].trip_id)
        for vehicle, _, _ in actor.awaiting_check.values():
            started.add(vehicle.trip_id)
    for ctrl in controllers:
        m.reroute_checks += ctrl.checks
        m.customizations += ctrl.customizations
    for key, rec in audit:
        if rec[0] == "rr":
            m.reroute_log.append((key.time_us,) + rec[1:])
    m.unfinished = m.injected - m.completed
    m.trip_records.sort()
    return m


# -- committed-log audits ---------------------------------------------------


def audit_occupancy(audit, storage_caps: dict[int, int]) -> None:
    occ: dict[int, int] = {}
    for _key, rec in audit:
        if rec[0] != "occ":
            continue
        _, link_id, delta, occ_after = rec
        occ[link_id] = occ.get(link_id, 0) + delta
        if occ[link_id] != occ_after:
            raise AuditError(f"link {link_id}: occupancy bookkeeping mismatch")
        if occ[link_id] > storage_caps[link_id]:
            raise AuditError(f"link {link_id}: occupancy {occ[link_id]} exceeds storage capacity")
        if occ[link_id] < 0:
            raise AuditError(f"link {link_id}: negative occupancy")


def audit_headways(audit, headway_of: dict[int, int], tolerance_us: int = 1) -> None:
    by_maneuver: dict[tuple[int, int], list[int]] = {}
    for _key, rec in audit:
        if rec[0] != "trans":
            continue
        _, link_id, maneuver, t2 = rec
        by_maneuver.setdefault((link_id, maneuver), []).append(t2)
    for (link_id, _man), times in by_maneuver.items():
        times.sort()
        h = headway_of[link_id]
        for a, b in zip(times, times[1:]):
            if b - a < h - tolerance_us:
                raise AuditError(
                    f"link {link_id}: transition gap {b - a} us below headway {h} us"
                )


def audit_stage_sums(audit) -> None:
    """Per traversal, (exit - entry) must equal dT1 + dT2 + dT3 exactly."""
    # stage records carry all four values; the identity is structural but we
    # recheck it from the log to catch bookkeeping regressions
    for _key, rec in audit:
        if rec[0] != "stage":
            continue
        _, _vid, link_id, t0, dt1, dt2, dt3 = rec
        if dt1 < 0 or dt2 < 0 or dt3 < 0:
            raise AuditError(f"link {link_id}: negative traversal stage")


def audit_conservation(metrics: RunMetrics, loaded: int) -> None:
    """loaded legs = completed + unfinished + dropped-unreachable, no double counts."""
    ids = [r[0] for r in metrics.trip_records]
    if len(ids) != len(set(ids)):
        raise AuditError("a trip completed more than once")
    if metrics.completed != len(ids):
        raise AuditError("completed count disagrees with trip records")
    if metrics.unfinished < 0:
        raise AuditError("negative unfinished trip count")
    if metrics.injected != metrics.completed + metrics.unfinished:
        raise AuditError("injected != completed + unfinished")
    if loaded != metrics.injected + metrics.dropped_unreachable:
        raise AuditError("loaded != injected + dropped_unreachable")


# -- validation statistics ----------------------------------------------------


def compare_series(sim: dict, ref: dict) -> SeriesComparison:
    """R^2 and relative-total error of simulated vs reference binned counts."""
    if set(sim) != set(ref):
        raise ValueError("mismatched bin structure between simulated and reference series")
    if not ref:
        return SeriesComparison(None, None, 0)
    keys = sorted(ref)
    r = [ref[k] for k in keys]
    s = [sim[k] for k in keys]
    mean_r = sum(r) / len(r)
    ss_tot = sum((x - mean_r) ** 2 for x in r)
    ss_res = sum((a - b) ** 2 for a, b in zip(s, r))
    r2 = None if ss_tot == 0 else 1.0 - ss_res / ss_tot
    total_r = sum(r)
    rel = None if total_r == 0 else (sum(s) - total_r) / total_r
    return SeriesComparison(r2, rel, len(r))


def diff_traversals(a: dict[int, int], b: dict[int, int]) -> dict[int, int]:
    """Per-link signed traversal-count deltas, B minus A."""
    out = {}
    for lid in set(a) | set(b):
        out[lid] = b.get(lid, 0) - a.get(lid, 0)
    return out


# -- CSV surfaces -------------------------------------------------------------


def write_summary(path, config_echo: dict, metrics: RunMetrics) -> None:
    with open(path, "w") as f:
        for k in sorted(config_echo):
            f.write(f"config.{k} = {config_echo[k]}\n")
        for k, v in metrics.scalar_summary().items():
            f.write(f"{k} = {v}\n")


def write_trips_csv(path, metrics: RunMetrics) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["trip_id", "depart_s", "arrive_s", "freespeed_s", "distance_m", "reroutes"])
        for trip_id, depart, arrive, free, dist, reroutes in metrics.trip_records:
            w.writerow([trip_id, fmt_s(depart), fmt_s(arrive), fmt_s(free), repr(dist), reroutes])


def write_link_bins_csv(path, metrics: RunMetrics) -> None:
    from .linkmodel import BIN_US

    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["link_id", "bin_start_s", "count", "mean_speed_mps"])
        for (lid, bin_idx) in sorted(metrics.link_bins):
            count, mean = metrics.link_bins[(lid, bin_idx)]
            w.writerow([lid, bin_idx * BIN_US // US_PER_S, count, f"{mean:.6f}"])


def write_reroute_log_csv(path, metrics: RunMetrics) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["time_s", "vehicle_id", "controller_id", "decision", "old_cost_s", "new_cost_s"])
        for time_us, vid, ctrl, decision, old, new in metrics.reroute_log:
            w.writerow([fmt_s(time_us), vid, ctrl, decision, fmt_s(old), fmt_s(new)])


def write_traversal_deltas_csv(path, deltas: dict[int, int]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["link_id", "delta"])
        for lid in sorted(deltas):
            w.writerow([lid, deltas[lid]])


def read_link_bins_csv(path) -> dict[tuple[int, int], int]:
    out = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            out[(int(row["link_id"]), int(row["bin_start_s"]))] = int(row["count"])
    return out


def read_reference_series_csv(path) -> dict[tuple[int, int], int]:
    out = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            out[(int(row["link_id"]), int(row["bin_start_s"]))] = int(row["count"])
    return out


def daily_traversals_from_bins(bins: dict[tuple[int, int], int]) -> dict[int, int]:
    out: dict[int, int] = {}
    for (lid, _bin_start), count in bins.items():
        out[lid] = out.get(lid, 0) + count
    return out
