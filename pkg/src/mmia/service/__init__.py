"""HTTP service and persistence wiring."""

from .config import EngineConfig, load_config
from .stores import ReviewQueueEntry, ReviewQueueStore, RunStore

__all__ = ["EngineConfig", "load_config", "ReviewQueueEntry", "ReviewQueueStore", "RunStore"]
