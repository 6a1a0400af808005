"""Dual-mode dispatch, the per-task cost ledger, and the operating-phase
token simulation."""

from .ledger import CostEntry, CostLedger
from .dispatch import dispatch_mode, execute_match, run_dual_mode
from .phases import PhaseReport, PhaseSimConfig, simulate_phases

__all__ = [
    "CostEntry",
    "CostLedger",
    "dispatch_mode",
    "execute_match",
    "run_dual_mode",
    "PhaseSimConfig",
    "PhaseReport",
    "simulate_phases",
]
