"""Event payloads, keys, and the fixed tie-break priority table.

Key ordering is (time, depth, priority, sender, seq):

* ``depth`` is the causal depth at equal simulated time — an event sent at the
  same instant as its parent orders strictly after the parent.  This is what
  lets the storage-protocol handshake emit a same-time ArrivedNotice without
  ever producing a decreasing key at the receiving actor, which in turn is
  what makes sequential and optimistic committed sequences identical.
* ``priority`` is the fixed per-payload rank below.
* ``(sender, seq)`` is the sending actor id and its per-sender send counter;
  the counter lives in actor snapshots, so it is rollback-deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .vehicle import Vehicle


@dataclass(frozen=True, slots=True)
class VehicleArrival:
    vehicle: Vehicle
    admitted: bool  # False for trip-start injection (needs storage admission)


@dataclass(frozen=True, slots=True)
class EnqueueRequest:
    vehicle_id: int
    from_link: int
    t2_us: int


@dataclass(frozen=True, slots=True)
class ArrivedNotice:
    vehicle_id: int
    t3_us: int


@dataclass(frozen=True, slots=True)
class LinkStatusUpdate:
    link_id: int
    tc_us: int
    heartbeat: bool = False


@dataclass(frozen=True, slots=True)
class Heartbeat:
    """Link self-tick driving periodic heartbeat status updates."""


@dataclass(frozen=True, slots=True)
class RerouteCheckRequest:
    vehicle_id: int
    link_id: int  # link the vehicle currently occupies
    start_node: int  # that link's end node: any new path starts here
    remainder: tuple[int, ...]  # current path after the occupied link
    dest: int


@dataclass(frozen=True, slots=True)
class RerouteCheckResponse:
    vehicle_id: int
    new_tail: tuple[int, ...] | None  # None = keep current path
    old_cost_us: int
    new_cost_us: int


# Fixed tie-break table: resolve storage handshakes before new arrivals and
# before rerouting traffic at the same instant.
PRIORITY = {
    ArrivedNotice: 0,
    EnqueueRequest: 1,
    VehicleArrival: 2,
    LinkStatusUpdate: 3,
    Heartbeat: 4,
    RerouteCheckRequest: 5,
    RerouteCheckResponse: 6,
}


class EventKey(NamedTuple):
    time_us: int
    depth: int
    priority: int
    sender: int
    seq: int

    def packed_seq(self) -> int:
        """Single-integer rendering of (sender, seq) for the event-log CSV."""
        return ((self.sender + 1) << 32) | self.seq


@dataclass(eq=False, slots=True)
class Event:
    key: EventKey
    dest: int
    payload: object

    @property
    def kind(self) -> str:
        return type(self.payload).__name__

    def __lt__(self, other: "Event") -> bool:
        # heap tiebreak only; duplicate keys occur transiently during rollback
        return self.key < other.key


ENVIRONMENT_SENDER = -1


def initial_event(time_us: int, seq: int, dest: int, payload: object) -> Event:
    key = EventKey(time_us, 0, PRIORITY[type(payload)], ENVIRONMENT_SENDER, seq)
    return Event(key, dest, payload)
