"""Verifiable plan-execute-audit reasoning engine.

Every task produces a machine-readable execution log that is verified
step-wise against a formal rule base; certified chains become reusable
theorems so similar tasks later resolve by retrieval matching instead of
full reasoning.
"""

__version__ = "0.1.0"
