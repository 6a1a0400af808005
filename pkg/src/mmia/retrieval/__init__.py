"""Task abstraction, deterministic embeddings, exact top-k search, and
theorem matching for the retrieval-resolution mode."""

from .embedding import EMBEDDER_ID, Embedding, embed
from .index import VectorIndex
from .matching import MatchResult, ProcessTemplate, abstract_task, match_theorem, rapid_judge

__all__ = [
    "Embedding",
    "embed",
    "EMBEDDER_ID",
    "VectorIndex",
    "ProcessTemplate",
    "MatchResult",
    "abstract_task",
    "match_theorem",
    "rapid_judge",
]
