"""Link actors: congestion delay, transition timing, and the storage
capacity handshake with neighboring links.

A vehicle entering at T0 accrues dT1 (flow-based congestion delay), dT2
(minimum headway / signal slot timing), and dT3 (downstream storage
backpressure); its link traversal is T0 -> T3 = T0 + dT1 + dT2 + dT3.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .engine import Actor, Context, SimulationError
from .events import (
    ArrivedNotice,
    EnqueueRequest,
    Event,
    Heartbeat,
    LinkStatusUpdate,
    RerouteCheckRequest,
    RerouteCheckResponse,
    VehicleArrival,
)
from .network import Link
from .timebase import US_PER_S, to_us
from .vehicle import Vehicle

BIN_US = 15 * 60 * US_PER_S  # 15-minute output bins


@dataclass(frozen=True)
class VdfParams:
    alpha: float = 0.15
    beta: float = 4.0
    window_s: float = 300.0  # trailing window for the flow estimate
    sat_rate_vphpl: float = 1800.0  # saturation flow per lane, drives headway

    @property
    def window_us(self) -> int:
        return to_us(self.window_s)


def bpr_delay_us(tf_us: int, q_vph: float, cap_vph: float, alpha: float, beta: float) -> int:
    """Congested traversal time dT1; equals tf at zero flow, monotone in q."""
    return int(round(tf_us * (1.0 + alpha * (q_vph / cap_vph) ** beta)))


def headway_us(lanes: int, sat_rate_vphpl: float) -> int:
    return int(round(3600.0 * US_PER_S / (sat_rate_vphpl * lanes)))


class _Traversal(NamedTuple):
    vehicle: Vehicle
    t0: int
    t1: int
    t2: int
    maneuver: int


class _Maneuver(NamedTuple):
    last_t2: int
    cycle: int
    window: int
    slots_used: int


EXIT_MANEUVER = -1  # terminal link: no downstream turn


class LinkActor(Actor):
    def __init__(
        self,
        link: Link,
        controller_ids: tuple[int, ...],
        home_controller: int,
        vdf: VdfParams,
        t_check_us: int,
        lsu_abs_us: int,
        lsu_rel: float,
        heartbeat_us: int,
        lsu_full: bool = True,
    ):
        super().__init__(link.id)
        self.link = link
        self.controller_ids = controller_ids
        self.home_controller = home_controller
        self.vdf = vdf
        self.t_check_us = t_check_us
        self.lsu_abs_us = lsu_abs_us
        self.lsu_rel = lsu_rel
        self.heartbeat_us = heartbeat_us
        self.lsu_full = lsu_full
        self._tf_us = link.tf_us
        self._headway_us = headway_us(link.lanes, vdf.sat_rate_vphpl)
        self._cap = link.storage_cap

        # dynamic state (everything below is snapshot-covered).  The FIFO and
        # ring lists are append-only with a consumed-prefix index so snapshots
        # can record (length, start) instead of copying them; elements past a
        # restored length are truncated and the start index rewinds the pops.
        self.occupancy = 0
        self.active: dict[int, _Traversal] = {}
        self.reserved: dict[int, int] = {}  # vehicle id -> upstream link id
        self.waiting: list[tuple] = []  # FIFO of deferred admissions
        self.waiting_start = 0
        self.maneuvers: dict[int, _Maneuver] = {}
        self.entry_ring: list[int] = []
        self.entry_start = 0
        self.exit_ring: list[tuple[int, int]] = []  # (t3, dt2 + dt3)
        self.exit_start = 0
        self.exit_sum = 0  # running sum of the live exit-ring extras
        self.awaiting_check: dict[int, tuple[Vehicle, int, float]] = {}
        self.last_reported_us = self._tf_us
        self.last_entry_us = -(1 << 62)
        self.hb_armed = False
        self.lsus_sent = 0
        self.heartbeats_sent = 0
        self.traversal_count = 0
        self.bins: dict[int, list] = {}  # bin index -> [entries, speed_sum, speed_n]
        self.completed: list[tuple] = []  # append-only

    # -- engine plumbing ----------------------------------------------------

    def snapshot(self):
        return (
            self.snd_count,
            self.occupancy,
            dict(self.active),
            dict(self.reserved),
            len(self.waiting),
            self.waiting_start,
            dict(self.maneuvers),
            len(self.entry_ring),
            self.entry_start,
            len(self.exit_ring),
            self.exit_start,
            self.exit_sum,
            dict(self.awaiting_check),
            self.last_reported_us,
            self.last_entry_us,
            self.hb_armed,
            self.lsus_sent,
            self.heartbeats_sent,
            self.traversal_count,
            {k: list(v) for k, v in self.bins.items()},
            len(self.completed),
        )

    def restore(self, snap):
        (
            self.snd_count,
            self.occupancy,
            active,
            reserved,
            n_waiting,
            self.waiting_start,
            maneuvers,
            n_entry,
            self.entry_start,
            n_exit,
            self.exit_start,
            self.exit_sum,
            awaiting,
            self.last_reported_us,
            self.last_entry_us,
            self.hb_armed,
            self.lsus_sent,
            self.heartbeats_sent,
            self.traversal_count,
            bins,
            n_completed,
        ) = snap
        self.active = dict(active)
        self.reserved = dict(reserved)
        del self.waiting[n_waiting:]
        self.maneuvers = dict(maneuvers)
        del self.entry_ring[n_entry:]
        del self.exit_ring[n_exit:]
        self.awaiting_check = dict(awaiting)
        self.bins = {k: list(v) for k, v in bins.items()}
        del self.completed[n_completed:]

    def handle(self, event: Event, ctx: Context) -> None:
        payload = event.payload
        if isinstance(payload, VehicleArrival):
            self._on_arrival(payload, ctx)
        elif isinstance(payload, EnqueueRequest):
            self._on_enqueue_request(payload, ctx)
        elif isinstance(payload, ArrivedNotice):
            self._on_arrived_notice(payload, ctx)
        elif isinstance(payload, Heartbeat):
            self._on_heartbeat(ctx)
        elif isinstance(payload, RerouteCheckResponse):
            self._on_check_response(payload, ctx)
        else:
            raise SimulationError(f"link {self.link.id}: unexpected payload {event.kind}")

    # -- flow estimation ----------------------------------------------------

    def estimate_flow(self, now_us: int) -> float:
        """Trailing-window entry rate in vehicles/hour."""
        w = self.vdf.window_us
        cutoff = now_us - w
        while self.entry_start < len(self.entry_ring) and self.entry_ring[self.entry_start] <= cutoff:
            self.entry_start += 1
        return (len(self.entry_ring) - self.entry_start) * 3600.0 * US_PER_S / w

    def congested_time_us(self, now_us: int) -> int:
        """The traversal time reported to controllers."""
        q = self.estimate_flow(now_us)
        dt1 = bpr_delay_us(self._tf_us, q, self.link.capacity_vph, self.vdf.alpha, self.vdf.beta)
        extra = 0
        if self.lsu_full:
            cutoff = now_us - self.vdf.window_us
            while self.exit_start < len(self.exit_ring) and self.exit_ring[self.exit_start][0] <= cutoff:
                self.exit_sum -= self.exit_ring[self.exit_start][1]
                self.exit_start += 1
            live = len(self.exit_ring) - self.exit_start
            if live:
                extra = self.exit_sum // live
        return dt1 + extra

    # -- admission and entry ------------------------------------------------

    def _on_arrival(self, payload: VehicleArrival, ctx: Context) -> None:
        vehicle = payload.vehicle
        if payload.admitted:
            if vehicle.trip_id not in self.reserved:
                raise SimulationError(
                    f"link {self.link.id}: arrival for unreserved vehicle {vehicle.trip_id}"
                )
            del self.reserved[vehicle.trip_id]
            self._enter(vehicle, ctx)
        elif self.occupancy < self._cap:
            self.occupancy += 1
            ctx.log(("occ", self.link.id, 1, self.occupancy))
            self._enter(vehicle, ctx)
        else:
            self.waiting.append(("start", vehicle))

    def _enter(self, vehicle: Vehicle, ctx: Context) -> None:
        t0 = ctx.now_us
        vehicle = vehicle.moved(vehicle.dist_m + self.link.length_m)
        q = self.estimate_flow(t0)
        self.entry_ring.append(t0)
        self.last_entry_us = t0
        self.traversal_count += 1
        ctx.log(("enter", self.link.id))
        self.bins.setdefault(t0 // BIN_US, [0, 0.0, 0])[0] += 1
        if not self.hb_armed:
            self.hb_armed = True
            ctx.send(self.actor_id, t0 + self.heartbeat_us, Heartbeat())
        if (
            vehicle.reroutable
            and vehicle.pos <= len(vehicle.path) - 2
            and t0 - vehicle.last_check_us >= self.t_check_us
        ):
            vehicle = vehicle.checked(t0)
            self.awaiting_check[vehicle.trip_id] = (vehicle, t0, q)
            ctx.send(
                self.home_controller,
                t0,
                RerouteCheckRequest(
                    vehicle.trip_id,
                    self.link.id,
                    self.link.to,
                    vehicle.path[vehicle.pos + 1 :],
                    vehicle.dest,
                ),
            )
        else:
            self._begin_traversal(vehicle, t0, q, ctx)

    def _on_check_response(self, payload: RerouteCheckResponse, ctx: Context) -> None:
        entry = self.awaiting_check.pop(payload.vehicle_id, None)
        if entry is None:
            raise SimulationError(
                f"link {self.link.id}: reroute response for unknown vehicle {payload.vehicle_id}"
            )
        vehicle, t0, q = entry
        if payload.new_tail is not None:
            vehicle = vehicle.with_tail(payload.new_tail)
        self._begin_traversal(vehicle, t0, q, ctx)

    # -- traversal timing ---------------------------------------------------

    def _begin_traversal(self, vehicle: Vehicle, t0: int, q: float, ctx: Context) -> None:
        dt1 = bpr_delay_us(self._tf_us, q, self.link.capacity_vph, self.vdf.alpha, self.vdf.beta)
        t1 = t0 + dt1
        maneuver = EXIT_MANEUVER if vehicle.on_last_link else vehicle.next_link
        t2 = self._timing_constraint(maneuver, t1)
        self.active[vehicle.trip_id] = _Traversal(vehicle, t0, t1, t2, maneuver)
        ctx.log(("trans", self.link.id, maneuver, t2))
        if vehicle.on_last_link:
            ctx.send(self.actor_id, t2, ArrivedNotice(vehicle.trip_id, t2))
        else:
            ctx.send(vehicle.next_link, t2, EnqueueRequest(vehicle.trip_id, self.link.id, t2))

    def _timing_constraint(self, maneuver: int, t1: int) -> int:
        state = self.maneuvers.get(maneuver)
        t2 = t1 if state is None else max(t1, state.last_t2 + self._headway_us)
        cycle = window = -1
        used = 0
        plan = self.link.plan if self.link.signalized else None
        if plan is not None:
            wins = plan.windows_for(maneuver)
            if maneuver != EXIT_MANEUVER and not wins:
                raise SimulationError(
                    f"link {self.link.id}: signal plan has no green for maneuver {maneuver}"
                )
            if wins:
                t2, cycle, window, used = self._next_green_slot(plan, wins, state, t2)
        self.maneuvers[maneuver] = _Maneuver(t2, cycle, window, used)
        return t2

    def _next_green_slot(self, plan, wins, state: _Maneuver | None, t2: int):
        cyc_us = plan.cycle_us
        while True:
            cycle, phase = divmod(t2, cyc_us)
            placed = None
            for wi, (off, dur, slots) in enumerate(wins):
                if phase < off:
                    placed = (cycle, wi, off, slots)
                    break
                if phase < off + dur:
                    placed = (cycle, wi, None, slots)
                    break
            if placed is None:  # past the last window: first window of next cycle
                placed = (cycle + 1, 0, wins[0][0], wins[0][2])
            cycle, wi, snap_off, slots = placed
            if snap_off is not None:
                t2 = cycle * cyc_us + snap_off
            used = (
                state.slots_used
                if state is not None and state.cycle == cycle and state.window == wi
                else 0
            )
            if used < slots:
                return t2, cycle, wi, used + 1
            # window exhausted: try the next one
            off, dur, _ = wins[wi]
            t2 = cycle * cyc_us + off + dur

    # -- storage protocol ---------------------------------------------------

    def _on_enqueue_request(self, payload: EnqueueRequest, ctx: Context) -> None:
        vid = payload.vehicle_id
        dup = vid in self.reserved
        if not dup:
            for i in range(self.waiting_start, len(self.waiting)):
                w = self.waiting[i]
                if w[0] == "req" and w[1] == vid:
                    dup = True
                    break
        if dup:
            raise SimulationError(f"link {self.link.id}: duplicate enqueue request for {vid}")
        if self.occupancy < self._cap:
            self.occupancy += 1
            self.reserved[vid] = payload.from_link
            ctx.log(("occ", self.link.id, 1, self.occupancy))
            ctx.send(payload.from_link, ctx.now_us, ArrivedNotice(vid, ctx.now_us))
        else:
            self.waiting.append(("req", vid, payload.from_link))

    def _on_arrived_notice(self, payload: ArrivedNotice, ctx: Context) -> None:
        vid = payload.vehicle_id
        rec = self.active.pop(vid, None)
        if rec is None:
            raise SimulationError(f"link {self.link.id}: arrived notice for unknown vehicle {vid}")
        t3 = payload.t3_us
        vehicle = rec.vehicle
        dt2 = rec.t2 - rec.t1
        dt3 = t3 - rec.t2
        ctx.log(("stage", vid, self.link.id, rec.t0, rec.t1 - rec.t0, dt2, dt3))
        slot = self.bins[rec.t0 // BIN_US]
        slot[1] += self.link.length_m * US_PER_S / (t3 - rec.t0) if t3 > rec.t0 else self.link.freespeed_mps
        slot[2] += 1
        self.occupancy -= 1
        ctx.log(("occ", self.link.id, -1, self.occupancy))
        self.exit_ring.append((t3, dt2 + dt3))
        self.exit_sum += dt2 + dt3
        if vehicle.on_last_link:
            record = (
                vid,
                vehicle.depart_us,
                t3,
                vehicle.freespeed_us,
                vehicle.dist_m,
                vehicle.reroutes,
            )
            self.completed.append(record)
            ctx.log(("done",) + record)
        else:
            ctx.send(vehicle.next_link, t3, VehicleArrival(vehicle.advanced(), admitted=True))
        self._maybe_send_lsu(t3, ctx)
        self._admit_waiter(ctx)

    def _admit_waiter(self, ctx: Context) -> None:
        if self.waiting_start >= len(self.waiting) or self.occupancy >= self._cap:
            return
        entry = self.waiting[self.waiting_start]
        self.waiting_start += 1
        self.occupancy += 1
        ctx.log(("occ", self.link.id, 1, self.occupancy))
        if entry[0] == "req":
            _, vid, from_link = entry
            self.reserved[vid] = from_link
            ctx.send(from_link, ctx.now_us, ArrivedNotice(vid, ctx.now_us))
        else:
            self._enter(entry[1], ctx)

    # -- status updates -----------------------------------------------------

    def lsu_threshold_us(self) -> int:
        return min(self.lsu_abs_us, int(round(self.lsu_rel * self._tf_us)))

    def should_send_lsu(self, new_tc_us: int) -> bool:
        return abs(new_tc_us - self.last_reported_us) >= self.lsu_threshold_us()

    def _maybe_send_lsu(self, now_us: int, ctx: Context) -> None:
        tc = self.congested_time_us(now_us)
        if self.should_send_lsu(tc):
            self.last_reported_us = tc
            self.lsus_sent += 1
            ctx.log(("lsu", self.link.id, tc, False))
            for cid in self.controller_ids:
                ctx.send(cid, now_us, LinkStatusUpdate(self.link.id, tc))

    def _on_heartbeat(self, ctx: Context) -> None:
        now = ctx.now_us
        active = self.occupancy > 0 or self.last_entry_us > now - self.heartbeat_us
        if active:
            tc = self.congested_time_us(now)
            self.heartbeats_sent += 1
            ctx.log(("lsu", self.link.id, tc, True))
            for cid in self.controller_ids:
                ctx.send(cid, now, LinkStatusUpdate(self.link.id, tc, heartbeat=True))
            ctx.send(self.actor_id, now + self.heartbeat_us, Heartbeat())
        else:
            self.hb_armed = False
