"""Shared fixtures: the congested-grid scenario and a cache of completed runs.

The acceptance suite replays the same scenario under many knob settings; runs
are cached per-config so each distinct configuration executes once per
session.
"""

from __future__ import annotations

import time

import pytest

from mesosim.scenario import RunConfig, RunResult, run_scenario

FIXTURE = dict(
    grid_rows=10,
    grid_cols=10,
    block_m=200.0,
    grid_profile="uniform",
    gen_trips=1000,
    depart_lo_s=0.0,
    depart_hi_s=300.0,
    od_split=0.1,
    penetration=0.5,
    seed=42,
)


def fixture_config(**overrides) -> RunConfig:
    values = dict(FIXTURE)
    values.update(overrides)
    return RunConfig(**values)


class RunCache:
    def __init__(self):
        self._runs: dict[tuple, tuple[RunResult, float]] = {}

    def get(self, **overrides) -> RunResult:
        return self.get_timed(**overrides)[0]

    def get_timed(self, **overrides) -> tuple[RunResult, float]:
        """Run (or reuse) the fixture scenario; returns (result, wall seconds)."""
        cfg = fixture_config(**overrides)
        key = tuple(sorted(cfg.echo().items()))
        if key not in self._runs:
            started = time.perf_counter()
            result = run_scenario(cfg)
            self._runs[key] = (result, time.perf_counter() - started)
        return self._runs[key]


@pytest.fixture(scope="session")
def runs() -> RunCache:
    return RunCache()


@pytest.fixture(scope="session")
def base_run(runs) -> RunResult:
    """The nominal congested-grid run: sequential, p=0.5, event log on."""
    return runs.get(event_log=True)
