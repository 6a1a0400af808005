"""Canonical printer: parse(print_rule(r)) is structurally equal to r, and
print_rule(parse(t)) is a fixpoint on canonical texts.

Canonical choices: ASCII comparators, double-quoted strings, plural
duration units, FORBID for a negated consequence, no REQUIRE keyword,
parentheses only where reparsing would otherwise change the tree.
"""

from __future__ import annotations

from .ast import And, Atom, Duration, Implies, Literal, Not, Or, RuleExpr, SetLiteral, Unless, Value


def _fmt_number(x: float) -> str:
    if isinstance(x, int):
        return str(x)
    return repr(x)


def _fmt_literal(v: Literal) -> str:
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, Duration):
        amount = int(v.amount) if float(v.amount).is_integer() else v.amount
        return f"{_fmt_number(amount)} {v.unit}"
    return _fmt_number(v)


def _fmt_value(v: Value) -> str:
    if isinstance(v, SetLiteral):
        return "[" + ", ".join(_fmt_literal(i) for i in v.items) + "]"
    return _fmt_literal(v)


_CMP_PRINT = {"in": "IN", "contains": "CONTAINS"}


def _atom(a: Atom) -> str:
    lhs = f"{a.entity}.{a.attribute}" if a.entity else a.attribute
    comp = _CMP_PRINT.get(a.comparator, a.comparator)
    return f"{lhs} {comp} {_fmt_value(a.value)}"


def _unary(e: RuleExpr) -> str:
    if isinstance(e, Atom):
        return _atom(e)
    if isinstance(e, Not):
        return "NOT " + _unary(e.expr)
    return "(" + _expr(e) + ")"


def _conj(e: RuleExpr) -> str:
    if isinstance(e, And):
        return " AND ".join(_unary(i) for i in e.items)
    return _unary(e)


def _expr(e: RuleExpr) -> str:
    if isinstance(e, Or):
        return " OR ".join(_conj(i) for i in e.items)
    return _conj(e)


def _consequence(e: RuleExpr) -> str:
    if isinstance(e, Not):
        return "FORBID " + _unary(e.expr)
    if isinstance(e, Unless):
        return "(" + _expr(e.base) + " UNLESS " + _expr(e.exception) + ")"
    return _expr(e)


def print_rule(rule: RuleExpr) -> str:
    """Render the canonical text of a rule statement."""
    if isinstance(rule, Unless):
        base = rule.base
        if isinstance(base, Implies):
            head = f"IF {_expr(base.condition)} THEN {_consequence(base.consequence)}"
        else:
            head = _expr(base)
        return f"{head} UNLESS {_expr(rule.exception)}"
    if isinstance(rule, Implies):
        return f"IF {_expr(rule.condition)} THEN {_consequence(rule.consequence)}"
    return _expr(rule)
