"""Step-wise chain verification: deterministic rule-grounded verifier,
LLM verifier, consensus auditing, and the structural-mutation catalog."""

from .types import AuditIssue, AuditReport, ConsensusPolicy, ConsensusResult
from .deterministic import DeterministicVerifier
from .llm import LlmVerifier
from .consensus import consensus_audit, simulate_consensus_error_rates
from .api import (
    detect_fallacy,
    verify_aggregation,
    verify_evidence_support,
    verify_plan_logic,
    verify_reasoning_chain,
)

__all__ = [
    "AuditIssue",
    "AuditReport",
    "ConsensusPolicy",
    "ConsensusResult",
    "DeterministicVerifier",
    "LlmVerifier",
    "consensus_audit",
    "simulate_consensus_error_rates",
    "verify_reasoning_chain",
    "verify_plan_logic",
    "verify_evidence_support",
    "detect_fallacy",
    "verify_aggregation",
]
