"""Shared CSV loading and CLI plumbing for the figure scripts.

All scripts are strict, read-only consumers of the simulator's documented CSV
schemas; a schema mismatch is an error, never a silently empty figure.
"""

from __future__ import annotations

import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")  # headless by design; scripts only write image files


class PlotError(Exception):
    """Input does not match the expected schema or is empty."""


def read_rows(path, required) -> list[dict]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise PlotError(f"{path}: missing column(s): {', '.join(missing)}")
        rows = list(reader)
    if not rows:
        raise PlotError(f"{path}: no data rows")
    return rows


def io_parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--in", dest="inp", required=True, help="input CSV path")
    p.add_argument("--out", required=True, help="output image path")
    return p


def render(build, args) -> int:
    """Build the figure, then write it; on input errors nothing is written."""
    try:
        fig, _ = build(args)
    except (PlotError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    fig.savefig(args.out, dpi=150, bbox_inches="tight")
    return 0
