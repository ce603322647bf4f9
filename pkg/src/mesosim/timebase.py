"""Simulation time base: integer microseconds since simulation midnight.

All ordering-sensitive arithmetic stays in integers so event comparisons
are exact across runs and engine modes.
"""

US_PER_S = 1_000_000


def to_us(seconds: float) -> int:
    return int(round(seconds * US_PER_S))


def to_s(us: int) -> float:
    return us / US_PER_S


def fmt_s(us: int) -> str:
    """Render microseconds as a fixed six-decimal seconds string (stable for hashing)."""
    sign = "-" if us < 0 else ""
    us = abs(us)
    return f"{sign}{us // US_PER_S}.{us % US_PER_S:06d}"
