"""Shared helpers for rule-language tests.

Holds the seeded random rule generator and the brute-force truth-table
oracle. The oracle evaluates statements structurally over explicit boolean
atom assignments; it never touches FactSet or the production evaluator, so
agreement between the two is a real check.
"""

from __future__ import annotations

import random

from mmia.rules import And, Atom, Duration, FactSet, Implies, Not, Or, RuleExpr, SetLiteral, Unless
from mmia.rules.ast import atoms_of

WORDS = ("alpha", "beta", "gamma", "delta", "prior", "coded", "acute", "stable")
UNITS = ("hours", "days", "months")


def oracle_truth(expr: RuleExpr, asg: dict[tuple[str, str], bool]) -> bool:
    if isinstance(expr, Atom):
        return asg[(expr.entity, expr.attribute)]
    if isinstance(expr, Not):
        return not oracle_truth(expr.expr, asg)
    if isinstance(expr, And):
        return all(oracle_truth(i, asg) for i in expr.items)
    if isinstance(expr, Or):
        return any(oracle_truth(i, asg) for i in expr.items)
    if isinstance(expr, Unless):
        if oracle_truth(expr.exception, asg):
            return False
        return oracle_truth(expr.base, asg)
    raise AssertionError("IF-THEN must not nest in boolean context")


def oracle_verdict(rule: RuleExpr, asg: dict[tuple[str, str], bool]) -> str:
    if isinstance(rule, Unless):
        base = oracle_verdict(rule.base, asg)
        if base == "inapplicable":
            return "inapplicable"
        if oracle_truth(rule.exception, asg):
            return "violated"
        return base
    if isinstance(rule, Implies):
        if not oracle_truth(rule.condition, asg):
            return "inapplicable"
        return "satisfied" if oracle_truth(rule.consequence, asg) else "violated"
    return "satisfied" if oracle_truth(rule, asg) else "violated"


def facts_for_assignment(rule: RuleExpr, asg: dict[tuple[str, str], bool]) -> FactSet:
    """Build a fact set that realizes each atom's assigned truth value."""
    atoms = {a.key: a for a in atoms_of(rule)}
    multi = {a.attribute for a in atoms.values() if a.comparator == "contains"}
    fs = FactSet(multi_valued=multi)
    for key, atom in atoms.items():
        want = asg[key]
        for value in _values_realizing(atom, want):
            fs.add(atom.entity, atom.attribute, value)
    return fs


def _values_realizing(atom: Atom, want: bool):
    v = atom.value
    c = atom.comparator
    if c == "contains":
        other = _different(v)
        return [v, other] if want else [other]
    if c == "=":
        return [v if want else _different(v)]
    if c == "!=":
        return [_different(v) if want else v]
    if c == "in":
        assert isinstance(v, SetLiteral)
        first = v.items[0]
        if want:
            return [first]
        candidate = _different(first)
        while any(_same(candidate, item) for item in v.items):
            candidate = _different(candidate)
        return [candidate]
    # Ordering comparators over numbers/durations.
    lo, hi = _bracket(v)
    if c == "<":
        return [lo if want else v]
    if c == "<=":
        return [v if want else hi]
    if c == ">":
        return [hi if want else v]
    return [v if want else lo]  # >=


def _same(a, b) -> bool:
    if isinstance(a, Duration) and isinstance(b, Duration):
        return a.hours == b.hours
    if isinstance(a, Duration) or isinstance(b, Duration):
        return False
    return type(a) is type(b) and a == b


def _different(v):
    if isinstance(v, Duration):
        return Duration(v.amount + 1, v.unit)
    if isinstance(v, str):
        return v + "_x"
    return v + 1


def _bracket(v):
    if isinstance(v, Duration):
        return Duration(v.amount - 1, v.unit), Duration(v.amount + 1, v.unit)
    return v - 1, v + 1


def random_literal(rng: random.Random):
    k = rng.randrange(3)
    if k == 0:
        return rng.choice(WORDS)
    if k == 1:
        return rng.randrange(2, 40)
    return Duration(float(rng.randrange(2, 40)), rng.choice(UNITS))


def random_atom(rng: random.Random, index: int) -> Atom:
    entity = rng.choice(("case", "order", "member", "doc", ""))
    attribute = f"f{index}"
    comparator = rng.choice(("=", "!=", "<", "<=", ">", ">=", "in", "contains"))
    if comparator == "in":
        base = random_literal(rng)
        items = [base]
        for _ in range(rng.randrange(1, 3)):
            items.append(_different(items[-1]))
        return Atom(entity, attribute, comparator, SetLiteral(tuple(items)))
    if comparator in ("<", "<=", ">", ">="):
        value = rng.choice((rng.randrange(2, 40), Duration(float(rng.randrange(2, 40)), rng.choice(UNITS))))
        return Atom(entity, attribute, comparator, value)
    return Atom(entity, attribute, comparator, random_literal(rng))


def random_bool_expr(rng: random.Random, atoms: list[Atom]) -> RuleExpr:
    """Combine the given atoms (each used once) into a random And/Or/Not tree."""
    nodes: list[RuleExpr] = []
    for a in atoms:
        nodes.append(Not(a) if rng.random() < 0.25 else a)
    while len(nodes) > 1:
        take = min(len(nodes), rng.randrange(2, 4))
        group, nodes = nodes[:take], nodes[take:]
        combined: RuleExpr = (And if rng.random() < 0.5 else Or)(tuple(group))
        if rng.random() < 0.15:
            combined = Not(combined)
        nodes.insert(rng.randrange(len(nodes) + 1), combined)
    return nodes[0]


def random_rule(rng: random.Random, max_atoms: int = 6) -> RuleExpr:
    """A random statement with at most ``max_atoms`` distinct atoms."""
    n = rng.randrange(1, max_atoms + 1)
    atoms = [random_atom(rng, i) for i in range(n)]
    shape = rng.randrange(4)
    if shape == 0 or n == 1:
        rule: RuleExpr = random_bool_expr(rng, atoms)
    elif shape == 1 or n == 2:
        split = rng.randrange(1, n)
        rule = Implies(
            random_bool_expr(rng, atoms[:split]),
            random_bool_expr(rng, atoms[split:]),
        )
    else:
        split1 = rng.randrange(1, n - 1) if n > 2 else 1
        split2 = rng.randrange(split1 + 1, n)
        body: RuleExpr = Implies(
            random_bool_expr(rng, atoms[:split1]),
            random_bool_expr(rng, atoms[split1:split2]),
        )
        if shape == 3:
            rule = Unless(body, random_bool_expr(rng, atoms[split2:]))
        else:
            rule = Unless(
                random_bool_expr(rng, atoms[: split2]),
                random_bool_expr(rng, atoms[split2:]),
            )
    return rule


def all_assignments(rule: RuleExpr) -> list[dict[tuple[str, str], bool]]:
    keys = sorted({a.key for a in atoms_of(rule)})
    out = []
    for mask in range(2 ** len(keys)):
        out.append({k: bool(mask >> i & 1) for i, k in enumerate(keys)})
    return out


# ----------------------------------------------------------------------
# Three-valued oracle: assignments may mark an atom "unknown" (None),
# realized as the fact being absent entirely.
# ----------------------------------------------------------------------

Truth3 = bool | None


def oracle_truth3(expr: RuleExpr, asg: dict[tuple[str, str], Truth3]) -> Truth3:
    if isinstance(expr, Atom):
        return asg[(expr.entity, expr.attribute)]
    if isinstance(expr, Not):
        t = oracle_truth3(expr.expr, asg)
        return None if t is None else not t
    if isinstance(expr, And):
        values = [oracle_truth3(i, asg) for i in expr.items]
        if any(v is False for v in values):
            return False
        if any(v is None for v in values):
            return None
        return True
    if isinstance(expr, Or):
        values = [oracle_truth3(i, asg) for i in expr.items]
        if any(v is True for v in values):
            return True
        if any(v is None for v in values):
            return None
        return False
    if isinstance(expr, Unless):
        e = oracle_truth3(expr.exception, asg)
        if e is True:
            return False
        if e is None:
            return None
        return oracle_truth3(expr.base, asg)
    raise AssertionError("IF-THEN must not nest in boolean context")


def oracle_verdict3(rule: RuleExpr, asg: dict[tuple[str, str], Truth3]) -> str:
    if isinstance(rule, Unless):
        base = oracle_verdict3(rule.base, asg)
        if base == "inapplicable":
            return "inapplicable"
        e = oracle_truth3(rule.exception, asg)
        if e is True:
            return "violated"
        if e is None:
            return "inapplicable"
        return base
    if isinstance(rule, Implies):
        c = oracle_truth3(rule.condition, asg)
        if c is not True:
            return "inapplicable"
        q = oracle_truth3(rule.consequence, asg)
        if q is True:
            return "satisfied"
        if q is False:
            return "violated"
        return "inapplicable"
    t = oracle_truth3(rule, asg)
    if t is True:
        return "satisfied"
    if t is False:
        return "violated"
    return "inapplicable"


def facts_for_assignment3(rule: RuleExpr, asg: dict[tuple[str, str], Truth3]) -> FactSet:
    """Unknown atoms are realized by omitting the fact entirely."""
    atoms = {a.key: a for a in atoms_of(rule)}
    multi = {a.attribute for a in atoms.values() if a.comparator == "contains"}
    fs = FactSet(multi_valued=multi)
    for key, atom in atoms.items():
        want = asg[key]
        if want is None:
            continue
        for value in _values_realizing(atom, want):
            fs.add(atom.entity, atom.attribute, value)
    return fs


def all_assignments3(rule: RuleExpr) -> list[dict[tuple[str, str], Truth3]]:
    keys = sorted({a.key for a in atoms_of(rule)})
    out: list[dict[tuple[str, str], Truth3]] = []
    values: tuple[Truth3, ...] = (True, False, None)
    for mask in range(3 ** len(keys)):
        asg = {}
        m = mask
        for k in keys:
            asg[k] = values[m % 3]
            m //= 3
        out.append(asg)
    return out
