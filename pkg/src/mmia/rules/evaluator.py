"""Three-valued rule evaluation over fact sets.

Truth values are Kleene's strong three-valued logic: a missing attribute
makes its atom ``unknown``, and unknowns propagate unless the expression
is decidable without them. At statement level the verdict is one of
satisfied / violated / inapplicable; an IF-THEN whose condition is not
established is inapplicable, never violated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import EvaluationError, ValidationError
from .ast import And, Atom, Duration, Implies, Literal, Not, Or, RuleExpr, SetLiteral, Unless
from .printer import print_rule

TRUE, FALSE, UNKNOWN = "true", "false", "unknown"

FactValue = Literal  # str | int | float | Duration


@dataclass
class FactSet:
    """Entity-attribute-value triples.

    An attribute named in ``multi_valued`` may hold several values per
    entity (e.g. an allergy list); any other attribute holds at most one
    and re-adding a conflicting value is rejected.
    """

    _facts: dict[tuple[str, str], list[FactValue]] = field(default_factory=dict)
    multi_valued: set[str] = field(default_factory=set)

    @staticmethod
    def from_triples(
        triples: list[tuple[str, str, FactValue]],
        multi_valued: set[str] | None = None,
    ) -> "FactSet":
        fs = FactSet(multi_valued=set(multi_valued or ()))
        for entity, attribute, value in triples:
            fs.add(entity, attribute, value)
        return fs

    def add(self, entity: str, attribute: str, value: FactValue) -> None:
        key = (entity, attribute)
        existing = self._facts.get(key)
        if existing is None:
            self._facts[key] = [value]
            return
        if attribute in self.multi_valued:
            if value not in existing:
                existing.append(value)
            return
        if existing != [value]:
            raise ValidationError(
                f"conflicting value for single-valued {entity}.{attribute}: "
                f"{existing[0]!r} vs {value!r}"
            )

    def get(self, entity: str, attribute: str) -> list[FactValue] | None:
        return self._facts.get((entity, attribute))

    def has(self, entity: str, attribute: str) -> bool:
        return (entity, attribute) in self._facts

    def triples(self) -> list[tuple[str, str, FactValue]]:
        out = []
        for (entity, attribute), values in self._facts.items():
            for v in values:
                out.append((entity, attribute, v))
        return out

    def copy(self) -> "FactSet":
        fs = FactSet(multi_valued=set(self.multi_valued))
        fs._facts = {k: list(v) for k, v in self._facts.items()}
        return fs

    def merge(self, other: "FactSet") -> None:
        self.multi_valued |= other.multi_valued
        for entity, attribute, value in other.triples():
            self.add(entity, attribute, value)

    def __len__(self) -> int:
        return sum(len(v) for v in self._facts.values())

    def to_dict(self) -> dict:
        return {
            "multi_valued": sorted(self.multi_valued),
            "triples": [
                [e, a, _value_to_json(v)]
                for (e, a, v) in sorted(self.triples(), key=lambda t: (t[0], t[1], str(t[2])))
            ],
        }

    @staticmethod
    def from_dict(d: dict) -> "FactSet":
        fs = FactSet(multi_valued=set(d.get("multi_valued", [])))
        for e, a, v in d.get("triples", []):
            fs.add(e, a, _value_from_json(v))
        return fs


def _value_to_json(v: FactValue):
    if isinstance(v, Duration):
        return {"duration": [v.amount, v.unit]}
    return v


def _value_from_json(v) -> FactValue:
    if isinstance(v, dict) and "duration" in v:
        amount, unit = v["duration"]
        return Duration(float(amount), unit)
    return v


@dataclass
class RuleVerdict:
    outcome: str  # satisfied | violated | inapplicable
    bindings: dict[str, list[str]]  # entity -> attributes consulted
    trace: list[dict]  # one entry per atom: rendered atom + its truth value


def _kind(v: FactValue) -> str:
    if isinstance(v, Duration):
        return "duration"
    if isinstance(v, bool):  # bool is an int subclass; keep it out of numbers
        return "text"
    if isinstance(v, (int, float)):
        return "number"
    return "text"


def _comparable(a: FactValue, b: FactValue) -> None:
    ka, kb = _kind(a), _kind(b)
    if ka != kb:
        raise EvaluationError(f"type mismatch: cannot compare {ka} with {kb}")


def _eq(a: FactValue, b: FactValue) -> bool:
    _comparable(a, b)
    if isinstance(a, Duration) and isinstance(b, Duration):
        return a.hours == b.hours
    return a == b


def _order(a: FactValue, b: FactValue, op: str) -> bool:
    _comparable(a, b)
    if _kind(a) == "text":
        raise EvaluationError(f"ordering comparator {op!r} not defined for text values")
    x = a.hours if isinstance(a, Duration) else a
    y = b.hours if isinstance(b, Duration) else b
    if op == "<":
        return x < y
    if op == "<=":
        return x <= y
    if op == ">":
        return x > y
    return x >= y


def _atom_truth(atom: Atom, facts: FactSet) -> str:
    values = facts.get(atom.entity, atom.attribute)
    if values is None:
        return UNKNOWN
    if atom.comparator == "contains":
        return TRUE if any(_eq(v, atom.value) for v in values) else FALSE
    if len(values) > 1:
        raise EvaluationError(
            f"comparator {atom.comparator!r} is ambiguous on multi-valued "
            f"{atom.entity}.{atom.attribute}; use CONTAINS"
        )
    value = values[0]
    if atom.comparator == "=":
        return TRUE if _eq(value, atom.value) else FALSE
    if atom.comparator == "!=":
        return FALSE if _eq(value, atom.value) else TRUE
    if atom.comparator == "in":
        assert isinstance(atom.value, SetLiteral)
        return TRUE if any(_eq(value, item) for item in atom.value.items) else FALSE
    return TRUE if _order(value, atom.value, atom.comparator) else FALSE


_RANK = {FALSE: 0, UNKNOWN: 1, TRUE: 2}
_BY_RANK = {v: k for k, v in _RANK.items()}


def _truth(expr: RuleExpr, facts: FactSet, trace: list[dict]) -> str:
    if isinstance(expr, Atom):
        t = _atom_truth(expr, facts)
        trace.append({"atom": print_rule(expr), "truth": t})
        return t
    if isinstance(expr, Not):
        t = _truth(expr.expr, facts, trace)
        return UNKNOWN if t == UNKNOWN else (FALSE if t == TRUE else TRUE)
    if isinstance(expr, And):
        return _BY_RANK[min(_RANK[_truth(i, facts, trace)] for i in expr.items)]
    if isinstance(expr, Or):
        return _BY_RANK[max(_RANK[_truth(i, facts, trace)] for i in expr.items)]
    if isinstance(expr, Unless):
        # As a consequence: the obligation fails outright when the
        # exception holds, else it is the base's truth.
        te = _truth(expr.exception, facts, trace)
        tb = _truth(expr.base, facts, trace)
        if te == TRUE:
            return FALSE
        if te == UNKNOWN:
            return UNKNOWN
        return tb
    raise EvaluationError("IF-THEN cannot nest inside a boolean expression")


def _verdict_of_truth(t: str) -> str:
    return {TRUE: "satisfied", FALSE: "violated", UNKNOWN: "inapplicable"}[t]


def eval_rule(rule: RuleExpr, facts: FactSet) -> RuleVerdict:
    """Evaluate a statement against a fact set.

    Never mutates the fact set. Raises evaluation-error on comparator/value
    kind mismatches.
    """
    trace: list[dict] = []
    outcome = _statement_verdict(rule, facts, trace)
    bindings: dict[str, list[str]] = {}
    from .ast import atoms_of

    for atom in atoms_of(rule):
        if facts.has(atom.entity, atom.attribute):
            bindings.setdefault(atom.entity, [])
            if atom.attribute not in bindings[atom.entity]:
                bindings[atom.entity].append(atom.attribute)
    return RuleVerdict(outcome=outcome, bindings=bindings, trace=trace)


def _statement_verdict(rule: RuleExpr, facts: FactSet, trace: list[dict]) -> str:
    if isinstance(rule, Unless):
        base = rule.base
        base_outcome = _statement_verdict(base, facts, trace)
        if base_outcome == "inapplicable":
            return "inapplicable"
        te = _truth(rule.exception, facts, trace)
        if te == TRUE:
            return "violated"
        if te == UNKNOWN:
            return "inapplicable"
        return base_outcome
    if isinstance(rule, Implies):
        tc = _truth(rule.condition, facts, trace)
        if tc != TRUE:
            return "inapplicable"
        return _verdict_of_truth(_truth(rule.consequence, facts, trace))
    return _verdict_of_truth(_truth(rule, facts, trace))


def derivable_atoms(rule: RuleExpr, facts: FactSet) -> list[tuple[str, str, FactValue]]:
    """Forward-chaining helper: new facts this rule would establish.

    Only IF-THEN rules whose condition is true derive anything, and only
    when the consequence is a positive equality atom (or a conjunction of
    them); each derived triple targets an attribute absent from the facts.
    An UNLESS exception suppresses derivation unless it is definitely false.
    """
    if isinstance(rule, Unless):
        if _truth(rule.exception, facts, []) != FALSE:
            return []
        rule = rule.base
    if not isinstance(rule, Implies):
        return []
    if _truth(rule.condition, facts, []) != TRUE:
        return []
    cons = rule.consequence
    if isinstance(cons, Unless):
        if _truth(cons.exception, facts, []) != FALSE:
            return []
        cons = cons.base
    parts = list(cons.items) if isinstance(cons, And) else [cons]
    out: list[tuple[str, str, FactValue]] = []
    for part in parts:
        if not (isinstance(part, Atom) and part.comparator == "="):
            return []
        if isinstance(part.value, SetLiteral):
            return []
        if not facts.has(part.entity, part.attribute):
            out.append((part.entity, part.attribute, part.value))
    return out
