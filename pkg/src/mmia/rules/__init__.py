"""Formal rule language: AST, parser, canonical printer, and the
three-valued evaluator that grounds every audit decision."""

from .ast import And, Atom, Duration, Implies, Not, Or, RuleExpr, SetLiteral, Unless, validate_rule
from .parser import parse_rule
from .printer import print_rule
from .evaluator import FactSet, RuleVerdict, derivable_atoms, eval_rule

__all__ = [
    "Atom",
    "And",
    "Or",
    "Not",
    "Implies",
    "Unless",
    "Duration",
    "SetLiteral",
    "RuleExpr",
    "validate_rule",
    "parse_rule",
    "print_rule",
    "FactSet",
    "RuleVerdict",
    "eval_rule",
    "derivable_atoms",
]
