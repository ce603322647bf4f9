"""Read-only figure scripts over the simulator's CSV outputs."""

from .common import PlotError

__all__ = ["PlotError"]
__version__ = "1.0.0"
