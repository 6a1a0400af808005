"""Recursive analyze -> plan -> execute -> aggregate loop and the
verifiable execution log it produces."""

from .types import (
    AtomicityVerdict,
    Budget,
    EvidenceRef,
    ExecutionLog,
    FinalAnswer,
    Plan,
    ReasoningStep,
    TaskSpec,
)
from .loop import (
    EngineContext,
    aggregate,
    assess_atomicity,
    execute_atomic,
    execute_task,
    plan_decompose,
)

__all__ = [
    "TaskSpec",
    "Budget",
    "AtomicityVerdict",
    "Plan",
    "ReasoningStep",
    "EvidenceRef",
    "FinalAnswer",
    "ExecutionLog",
    "EngineContext",
    "assess_atomicity",
    "plan_decompose",
    "execute_task",
    "execute_atomic",
    "aggregate",
]
