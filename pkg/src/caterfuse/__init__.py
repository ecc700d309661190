"""caterfuse: compile graph states into caterpillar resource states and
simulate their fusion-based generation pipeline."""

from .graphstate import FusionOutcome, GraphState, Status

__version__ = "0.1.0"

__all__ = ["FusionOutcome", "GraphState", "Status", "__version__"]
