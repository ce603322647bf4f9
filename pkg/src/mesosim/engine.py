"""Discrete event engine: deterministic sequential mode and an optimistic
multi-worker mode with rollback (Time Warp).

The optimistic engine runs logical workers under a deterministic cooperative
scheduler: each worker owns the actors of its partitions and speculatively
processes its own event heap in key order.  A straggler or anti-message from
another worker rolls the affected actor back to its pre-event snapshot,
re-enqueues the rolled-back events and cancels their sends.  Events are
committed once global virtual time (the minimum key time over all worker
heaps) has passed them; committed per-actor sequences are identical to the
sequential engine's by construction.
"""

from __future__ import annotations

import heapq
from bisect import bisect_right
from dataclasses import dataclass, field

from .events import ENVIRONMENT_SENDER, Event, EventKey, PRIORITY


class SimulationError(Exception):
    """Fatal model or configuration error."""


class CausalityError(SimulationError):
    """An actor attempted to send an event into its own past."""


@dataclass
class CommitStats:
    committed: int = 0
    rolled_back: int = 0

    @property
    def efficiency(self) -> float:
        total = self.committed + self.rolled_back
        return 1.0 if total == 0 else self.committed / total


class Actor:
    """Base class for simulation actors.

    Subclasses implement ``handle`` and snapshot/restore over their full model
    state.  ``snd_count`` (the per-sender event sequence counter) must be part
    of the snapshot so re-executed sends reproduce identical keys.
    """

    def __init__(self, actor_id: int):
        self.actor_id = actor_id
        self.snd_count = 0

    def handle(self, event: Event, ctx: "Context") -> None:
        raise NotImplementedError

    def snapshot(self):
        raise NotImplementedError

    def restore(self, snap) -> None:
        raise NotImplementedError


class Context:
    """Handler-facing interface: current time, send, and audit logging."""

    def __init__(self, engine):
        self._engine = engine
        self._actor: Actor | None = None
        self._key: EventKey | None = None
        self.sends: list[Event] = []
        self.logs: list[tuple] = []

    def _begin(self, actor: Actor, key: EventKey) -> None:
        self._actor = actor
        self._key = key
        self.sends = []
        self.logs = []

    @property
    def now_us(self) -> int:
        return self._key.time_us

    def send(self, dest: int, time_us: int, payload: object) -> Event:
        key = self._key
        if time_us < key.time_us:
            raise CausalityError(
                f"actor {self._actor.actor_id} at t={key.time_us} sent "
                f"{type(payload).__name__} into the past (t={time_us})"
            )
        depth = key.depth + 1 if time_us == key.time_us else 0
        ev = Event(
            EventKey(time_us, depth, PRIORITY[type(payload)], self._actor.actor_id, self._actor.snd_count),
            dest,
            payload,
        )
        self._actor.snd_count += 1
        self.sends.append(ev)
        return ev

    def log(self, record: tuple) -> None:
        """Record an audit fact; committed (or rolled back) with the event."""
        self.logs.append(record)


def _check_dests(actors: dict[int, Actor], events) -> None:
    for ev in events:
        if ev.dest not in actors:
            raise SimulationError(f"event addressed to unknown actor id {ev.dest}")


class SequentialEngine:
    """Reference executor: single-threaded, strict EventKey order."""

    def __init__(self, actors: dict[int, Actor]):
        self.actors = actors
        self.audit: list[tuple[EventKey, tuple]] = []
        self.event_log: list[tuple[EventKey, int, str]] = []
        self.beyond_horizon = 0  # events left unprocessed at the end-time cutoff
        self._seq_by_actor: dict[int, list[tuple[EventKey, str]]] = {a: [] for a in actors}

    def run(self, initial_events: list[Event], end_time_us: int) -> CommitStats:
        _check_dests(self.actors, initial_events)
        heap: list[tuple[EventKey, Event]] = [(ev.key, ev) for ev in initial_events]
        heapq.heapify(heap)
        ctx = Context(self)
        stats = CommitStats()
        last_key: dict[int, EventKey] = {}
        while heap:
            key, ev = heapq.heappop(heap)
            if key.time_us >= end_time_us:
                self.beyond_horizon = len(heap) + 1
                break  # sends never go into the past: nothing earlier can appear
            actor = self.actors.get(ev.dest)
            if actor is None:
                raise SimulationError(f"event addressed to unknown actor id {ev.dest}")
            prev = last_key.get(ev.dest)
            assert prev is None or prev < key, f"non-increasing key at actor {ev.dest}"
            last_key[ev.dest] = key
            ctx._begin(actor, key)
            actor.handle(ev, ctx)
            for out in ctx.sends:
                heapq.heappush(heap, (out.key, out))
            for rec in ctx.logs:
                self.audit.append((key, rec))
            self.event_log.append((key, ev.dest, ev.kind))
            self._seq_by_actor[ev.dest].append((key, ev.kind))
            stats.committed += 1
        return stats

    def committed_by_actor(self) -> dict[int, list[tuple[EventKey, str]]]:
        return self._seq_by_actor


@dataclass
class _Processed:
    event: Event
    snap: object
    sends: list[Event]
    logs: list[tuple]


@dataclass
class _ActorRt:
    actor: Actor
    worker: int
    processed: list[_Processed] = field(default_factory=list)


class TimeWarpEngine:
    """Optimistic engine over logical workers with rollback and GVT commits."""

    def __init__(
        self,
        actors: dict[int, Actor],
        worker_of: dict[int, int],
        workers: int,
        gvt_interval_us: int = 60_000_000,
        batch: int = 16,
    ):
        if workers < 1:
            raise SimulationError("workers must be >= 1")
        self.workers = workers
        self.batch = batch
        self.gvt_interval_us = max(1, gvt_interval_us)
        self._rt = {
            aid: _ActorRt(actor, worker_of.get(aid, 0) % workers) for aid, actor in actors.items()
        }
        self._heaps: list[list[tuple[EventKey, Event]]] = [[] for _ in range(workers)]
        # cancellation is by object identity: a re-executed send can carry the
        # same key as the stale copy it replaces, so keys alone are ambiguous
        self._cancelled: dict[int, Event] = {}
        self._committed: list[_Processed] = []
        self.stats = CommitStats()
        self.audit: list[tuple[EventKey, tuple]] = []
        self.event_log: list[tuple[EventKey, int, str]] = []
        self._seq_by_actor: dict[int, list[tuple[EventKey, str]]] = {a: [] for a in actors}
        self._last_gvt = -1
        self.beyond_horizon = 0  # events dropped at the end-time cutoff

    # -- queue plumbing -----------------------------------------------------

    def _enqueue(self, ev: Event) -> None:
        rt = self._rt.get(ev.dest)
        if rt is None:
            raise SimulationError(f"event addressed to unknown actor id {ev.dest}")
        heapq.heappush(self._heaps[rt.worker], (ev.key, ev))

    def _pop_valid(self, w: int, end_time_us: int, throttle_us: int):
        heap = self._heaps[w]
        while heap:
            if heap[0][0].time_us >= throttle_us:
                return None  # stay near GVT to bound speculation
            key, ev = heapq.heappop(heap)
            if id(ev) in self._cancelled:
                del self._cancelled[id(ev)]
                continue
            if key.time_us >= end_time_us:
                self.beyond_horizon += 1
                continue  # beyond the horizon: drop
            return ev
        return None

    def _clean_top(self, w: int):
        heap = self._heaps[w]
        while heap and id(heap[0][1]) in self._cancelled:
            _, ev = heapq.heappop(heap)
            del self._cancelled[id(ev)]
        return heap[0][0] if heap else None

    # -- rollback machinery -------------------------------------------------

    def _rollback(self, rt: _ActorRt, key: EventKey, annihilate: "Event | None") -> None:
        """Undo all processed events of ``rt`` with key >= ``key``.

        ``annihilate`` names an event being cancelled by an anti-message; it
        rolls back with the rest but is not re-enqueued.
        """
        keys = [p.event.key for p in rt.processed]
        idx = bisect_right(keys, key)
        # bisect_right lands after an equal key; an annihilated entry rolls back too
        if annihilate is not None and idx > 0 and rt.processed[idx - 1].event is annihilate:
            idx -= 1
        entries = rt.processed[idx:]
        if not entries:
            return
        del rt.processed[idx:]
        rt.actor.restore(entries[0].snap)
        self.stats.rolled_back += len(entries)
        for entry in reversed(entries):
            for out in entry.sends:
                self._cancel(out)
        for entry in entries:
            if entry.event is annihilate:
                continue
            self._enqueue(entry.event)

    def _cancel(self, ev: Event) -> None:
        rt = self._rt[ev.dest]
        keys = [p.event.key for p in rt.processed]
        i = bisect_right(keys, ev.key) - 1
        if i >= 0 and keys[i] == ev.key and rt.processed[i].event is ev:
            assert ev.key.time_us >= self._last_gvt, "rollback past GVT"
            self._rollback(rt, ev.key, annihilate=ev)
        else:
            self._cancelled[id(ev)] = ev

    # -- main loop ----------------------------------------------------------

    def run(self, initial_events: list[Event], end_time_us: int) -> CommitStats:
        _check_dests({a: rt.actor for a, rt in self._rt.items()}, initial_events)
        for ev in initial_events:
            self._enqueue(ev)
        ctx = Context(self)
        while True:
            gvt = self._gvt()
            if gvt is None:
                break  # quiesced: nothing left anywhere
            # the worker holding the GVT event can always advance, so the
            # throttle cannot deadlock
            throttle = gvt + self.gvt_interval_us
            for w in range(self.workers):
                for _ in range(self.batch):
                    ev = self._pop_valid(w, end_time_us, throttle)
                    if ev is None:
                        break
                    rt = self._rt[ev.dest]
                    if rt.processed and ev.key < rt.processed[-1].event.key:
                        assert ev.key.time_us >= self._last_gvt, "straggler past GVT"
                        self._rollback(rt, ev.key, annihilate=None)
                    snap = rt.actor.snapshot()
                    ctx._begin(rt.actor, ev.key)
                    rt.actor.handle(ev, ctx)
                    for out in ctx.sends:
                        self._enqueue(out)
                    rt.processed.append(_Processed(ev, snap, list(ctx.sends), list(ctx.logs)))
            if gvt - self._last_gvt >= self.gvt_interval_us:
                self._commit_below(gvt)
                self._last_gvt = gvt
        self._commit_below(None)
        return self.stats

    def _gvt(self):
        tops = [self._clean_top(w) for w in range(self.workers)]
        tops = [k.time_us for k in tops if k is not None]
        return min(tops) if tops else None

    def _commit_below(self, gvt: int | None) -> None:
        for rt in self._rt.values():
            if gvt is None:
                n = len(rt.processed)
            else:
                n = 0
                for p in rt.processed:
                    if p.event.key.time_us >= gvt:
                        break
                    n += 1
            if n:
                self._committed.extend(rt.processed[:n])
                del rt.processed[:n]
                self.stats.committed += n

    # -- committed views ----------------------------------------------------

    def finalize(self) -> None:
        """Sort committed entries into global key order and build the logs."""
        self._committed.sort(key=lambda p: p.event.key)
        for p in self._committed:
            key = p.event.key
            for rec in p.logs:
                self.audit.append((key, rec))
            self.event_log.append((key, p.event.dest, p.event.kind))
            self._seq_by_actor[p.event.dest].append((key, p.event.kind))

    def committed_by_actor(self) -> dict[int, list[tuple[EventKey, str]]]:
        return self._seq_by_actor


def event_log_rows(event_log):
    """Render committed events as the documented replay-oracle CSV rows."""
    for key, dest, kind in event_log:
        yield f"{key.time_us},{key.priority},{key.packed_seq()},{dest},{kind}"
