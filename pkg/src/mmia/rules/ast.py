"""Rule AST.

Statements are IF-THEN implications, optionally wrapped in an UNLESS
exception, over boolean combinations of atoms. An atom compares one
``entity.attribute`` against a literal. Nesting discipline: Implies and
Unless live at the top level only (Unless additionally as an Implies
consequence); And/Or/Not nest freely below them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

COMPARATORS = ("=", "!=", "<", "<=", ">", ">=", "in", "contains")

# Canonical duration units, normalized to hours for comparison.
# Months count as 30-day months.
UNIT_HOURS = {"hours": 1.0, "days": 24.0, "months": 720.0}
UNIT_ALIASES = {
    "hour": "hours",
    "hours": "hours",
    "day": "days",
    "days": "days",
    "month": "months",
    "months": "months",
}


@dataclass(frozen=True)
class Duration:
    """A duration literal; equality is structural (amount + unit), while
    comparisons in the evaluator use the normalized hour value."""

    amount: float
    unit: str

    def __post_init__(self):
        if self.unit not in UNIT_HOURS:
            raise ValueError(f"unknown duration unit {self.unit!r}")
        object.__setattr__(self, "amount", float(self.amount))

    @property
    def hours(self) -> float:
        return self.amount * UNIT_HOURS[self.unit]


@dataclass(frozen=True)
class SetLiteral:
    """An ordered set literal for IN comparisons; order is preserved so the
    printed form round-trips structurally."""

    items: tuple["Literal", ...]


Literal = Union[str, int, float, Duration]
Value = Union[Literal, SetLiteral]


@dataclass(frozen=True)
class Atom:
    entity: str  # may be "" for bare attributes
    attribute: str
    comparator: str
    value: Value

    def __post_init__(self):
        if self.comparator not in COMPARATORS:
            raise ValueError(f"unknown comparator {self.comparator!r}")
        if self.comparator == "in" and not isinstance(self.value, SetLiteral):
            raise ValueError("IN requires a set literal")
        if self.comparator != "in" and isinstance(self.value, SetLiteral):
            raise ValueError(f"{self.comparator} cannot take a set literal")

    @property
    def key(self) -> tuple[str, str]:
        return (self.entity, self.attribute)


@dataclass(frozen=True)
class Not:
    expr: "RuleExpr"


@dataclass(frozen=True)
class And:
    items: tuple["RuleExpr", ...]

    def __post_init__(self):
        if len(self.items) < 2:
            raise ValueError("And needs at least two operands")


@dataclass(frozen=True)
class Or:
    items: tuple["RuleExpr", ...]

    def __post_init__(self):
        if len(self.items) < 2:
            raise ValueError("Or needs at least two operands")


@dataclass(frozen=True)
class Implies:
    condition: "RuleExpr"
    consequence: "RuleExpr"


@dataclass(frozen=True)
class Unless:
    base: "RuleExpr"
    exception: "RuleExpr"


RuleExpr = Union[Atom, Not, And, Or, Implies, Unless]

_BOOLEAN_NODES = (Atom, Not, And, Or)


def _plain(expr: RuleExpr) -> bool:
    """True when the subtree contains no Implies/Unless."""
    if isinstance(expr, Atom):
        return True
    if isinstance(expr, Not):
        return _plain(expr.expr)
    if isinstance(expr, (And, Or)):
        return all(_plain(i) for i in expr.items)
    return False


def validate_rule(rule: RuleExpr) -> None:
    """Enforce the nesting discipline on a programmatically built AST.

    Allowed shapes: plain expr; IF plain THEN cons; <either> UNLESS plain;
    where cons is plain or (plain UNLESS plain).
    """
    if isinstance(rule, Unless):
        if not _plain(rule.exception):
            raise ValueError("UNLESS exception must be a plain expression")
        base = rule.base
        if isinstance(base, Implies):
            _validate_implies(base)
        elif not _plain(base):
            raise ValueError("UNLESS base must be plain or an IF-THEN statement")
        return
    if isinstance(rule, Implies):
        _validate_implies(rule)
        return
    if not _plain(rule):
        raise ValueError("Implies/Unless may not nest inside boolean expressions")


def _validate_implies(rule: Implies) -> None:
    if not _plain(rule.condition):
        raise ValueError("IF condition must be a plain expression")
    cons = rule.consequence
    if isinstance(cons, Unless):
        if not (_plain(cons.base) and _plain(cons.exception)):
            raise ValueError("consequence UNLESS must wrap plain expressions")
    elif not _plain(cons):
        raise ValueError("THEN consequence must be plain or a plain UNLESS group")


def atoms_of(rule: RuleExpr) -> list[Atom]:
    """All atoms in the tree, left-to-right."""
    out: list[Atom] = []

    def walk(e: RuleExpr) -> None:
        if isinstance(e, Atom):
            out.append(e)
        elif isinstance(e, Not):
            walk(e.expr)
        elif isinstance(e, (And, Or)):
            for i in e.items:
                walk(i)
        elif isinstance(e, Implies):
            walk(e.condition)
            walk(e.consequence)
        elif isinstance(e, Unless):
            walk(e.base)
            walk(e.exception)

    walk(rule)
    return out
