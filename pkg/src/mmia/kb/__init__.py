"""Knowledge base: rule records with provenance and the
candidate -> expert-approved lifecycle, plus LLM-assisted extraction."""

from .models import Axiom, SourceSpan
from .store import KnowledgeBase
from .extraction import derive_theorems, extract_candidates

__all__ = ["Axiom", "SourceSpan", "KnowledgeBase", "extract_candidates", "derive_theorems"]
