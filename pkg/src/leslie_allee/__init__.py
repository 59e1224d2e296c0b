"""Leslie-Gower predator-prey model with Allee effect and a generalist predator."""

from .model import OriginalParams, PhaseState, ScaledParams

__all__ = ["OriginalParams", "ScaledParams", "PhaseState"]
__version__ = "0.1.0"
