"""In-simulation vehicle journey state.

Vehicles travel inside events and link-actor state, so the record is
immutable: every mutation goes through ``replace``, which keeps actor
snapshots cheap (shared references) and rollback sound.  A NamedTuple rather
than a frozen dataclass because vehicles are copied on every hop and
``_replace`` is much cheaper.
"""

from __future__ import annotations

from typing import NamedTuple


class Vehicle(NamedTuple):
    trip_id: int
    origin: int
    dest: int
    depart_us: int
    reroutable: bool
    path: tuple[int, ...]  # link ids, origin -> destination
    pos: int = 0  # index of the link the vehicle currently occupies
    last_check_us: int = -(1 << 62)
    reroutes: int = 0
    freespeed_us: int = 0  # initial route freespeed traversal time
    dist_m: float = 0.0  # accumulated traversed length

    @property
    def current_link(self) -> int:
        return self.path[self.pos]

    @property
    def on_last_link(self) -> bool:
        return self.pos == len(self.path) - 1

    @property
    def next_link(self) -> int | None:
        return None if self.on_last_link else self.path[self.pos + 1]

    # hand-rolled copies: these run on every hop and _replace is kwargs-slow

    def advanced(self) -> "Vehicle":
        t = tuple(self)
        return tuple.__new__(Vehicle, t[:6] + (t[6] + 1,) + t[7:])

    def with_tail(self, new_tail: tuple[int, ...]) -> "Vehicle":
        """Replace the path beyond the current link after an accepted reroute."""
        t = tuple(self)
        return tuple.__new__(
            Vehicle, t[:5] + (t[5][: t[6] + 1] + new_tail,) + t[6:8] + (t[8] + 1,) + t[9:]
        )

    def moved(self, dist_m: float) -> "Vehicle":
        t = tuple(self)
        return tuple.__new__(Vehicle, t[:10] + (dist_m,))

    def checked(self, last_check_us: int) -> "Vehicle":
        t = tuple(self)
        return tuple.__new__(Vehicle, t[:7] + (last_check_us,) + t[8:])

    def replace(self, **kw) -> "Vehicle":
        return self._replace(**kw)
