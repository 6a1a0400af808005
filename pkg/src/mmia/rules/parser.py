"""Recursive-descent parser for the rule grammar.

    statement  := implication [UNLESS expr]
    implication:= IF expr THEN consequence | expr
    consequence:= FORBID unary | REQUIRE expr | '(' expr UNLESS expr ')' | expr
    expr       := conj (OR conj)*
    conj       := unary (AND unary)*
    unary      := NOT unary | primary
    primary    := '(' expr ')' | atom
    atom       := lhs comparator literal
    lhs        := IDENT ['.' IDENT]
    literal    := STRING | NUMBER [unit] | IDENT | '[' literal (',' literal)* ']'

Precedence NOT > AND > OR; FORBID p desugars to NOT p, REQUIRE p to p.
Errors carry 1-based line/column and the expected token class.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError
from .ast import (
    UNIT_ALIASES,
    And,
    Atom,
    Duration,
    Implies,
    Literal,
    Not,
    Or,
    RuleExpr,
    SetLiteral,
    Unless,
)

KEYWORDS = {
    "IF", "THEN", "UNLESS", "AND", "OR", "NOT",
    "FORBID", "REQUIRE", "CONTAINS", "IN",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<number>-?\d+(?:\.\d+)?)
  | (?P<word>[A-Za-z_][A-Za-z0-9_-]*)
  | (?P<cmp>!=|<=|>=|=|<|>|≠|≤|≥)
  | (?P<punct>[()\[\],.])
    """,
    re.VERBOSE,
)

_CMP_CANON = {"≠": "!=", "≤": "<=", "≥": ">="}


@dataclass(frozen=True)
class Token:
    kind: str  # string | number | word | keyword | cmp | punct | eof
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup or ""
        raw = m.group(0)
        if kind != "ws":
            if kind == "word" and raw in KEYWORDS:
                kind = "keyword"
            if kind == "cmp":
                raw = _CMP_CANON.get(raw, raw)
            tokens.append(Token(kind, raw, line, col))
        newlines = m.group(0).count("\n")
        if newlines:
            line += newlines
            col = len(m.group(0)) - m.group(0).rfind("\n")
        else:
            col += len(m.group(0))
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.cur
        self.i += 1
        return tok

    def at_keyword(self, *words: str) -> bool:
        return self.cur.kind == "keyword" and self.cur.text in words

    def expect_keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            self.fail(f"expected {word}", expected=word)
        return self.advance()

    def fail(self, message: str, expected: str = "") -> None:
        tok = self.cur
        shown = tok.text or "end of input"
        raise ParseError(f"{message}, found {shown!r}", tok.line, tok.column, expected)

    # statement := implication [UNLESS expr]
    def statement(self) -> RuleExpr:
        stmt = self.implication()
        if self.at_keyword("UNLESS"):
            self.advance()
            exception = self.expr()
            stmt = Unless(stmt, exception)
        if self.cur.kind != "eof":
            self.fail("trailing input after statement")
        return stmt

    def implication(self) -> RuleExpr:
        if self.at_keyword("IF"):
            self.advance()
            condition = self.expr()
            self.expect_keyword("THEN")
            consequence = self.consequence()
            return Implies(condition, consequence)
        return self.expr()

    def consequence(self) -> RuleExpr:
        if self.at_keyword("FORBID"):
            self.advance()
            return Not(self.unary())
        if self.at_keyword("REQUIRE"):
            self.advance()
            return self.expr()
        # A parenthesized group may carry an inner UNLESS.
        if self.cur.kind == "punct" and self.cur.text == "(":
            mark = self.i
            self.advance()
            inner = self.expr()
            if self.at_keyword("UNLESS"):
                self.advance()
                exception = self.expr()
                self._expect_punct(")")
                return Unless(inner, exception)
            self.i = mark  # ordinary parenthesized expression; reparse as expr
        return self.expr()

    def expr(self) -> RuleExpr:
        items = [self.conj()]
        while self.at_keyword("OR"):
            self.advance()
            items.append(self.conj())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def conj(self) -> RuleExpr:
        items = [self.unary()]
        while self.at_keyword("AND"):
            self.advance()
            items.append(self.unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def unary(self) -> RuleExpr:
        if self.at_keyword("NOT"):
            self.advance()
            return Not(self.unary())
        return self.primary()

    def primary(self) -> RuleExpr:
        if self.cur.kind == "punct" and self.cur.text == "(":
            self.advance()
            inner = self.expr()
            self._expect_punct(")")
            return inner
        return self.atom()

    def atom(self) -> Atom:
        if self.cur.kind != "word":
            self.fail("expected an expression", expected="expression")
        first = self.advance().text
        entity, attribute = "", first
        if self.cur.kind == "punct" and self.cur.text == ".":
            self.advance()
            if self.cur.kind != "word":
                self.fail("expected attribute name after '.'", expected="identifier")
            entity, attribute = first, self.advance().text
        comparator = self._comparator()
        value = self._set_literal() if comparator == "in" else self._literal()
        try:
            return Atom(entity, attribute, comparator, value)
        except ValueError as exc:
            raise ParseError(str(exc), self.cur.line, self.cur.column)

    def _comparator(self) -> str:
        if self.cur.kind == "cmp":
            return self.advance().text
        if self.at_keyword("CONTAINS"):
            self.advance()
            return "contains"
        if self.at_keyword("IN"):
            self.advance()
            return "in"
        self.fail("expected a comparator", expected="comparator")
        raise AssertionError("unreachable")

    def _literal(self) -> Literal:
        tok = self.cur
        if tok.kind == "string":
            self.advance()
            return _unescape(tok.text)
        if tok.kind == "number":
            self.advance()
            num: float = float(tok.text) if "." in tok.text else int(tok.text)
            if self.cur.kind == "word" and self.cur.text.lower() in UNIT_ALIASES:
                unit = UNIT_ALIASES[self.advance().text.lower()]
                return Duration(float(num), unit)
            return num
        if tok.kind == "word":
            self.advance()
            return tok.text  # bare word reads as a text literal
        self.fail("expected a literal", expected="literal")
        raise AssertionError("unreachable")

    def _set_literal(self) -> SetLiteral:
        self._expect_punct("[")
        items = [self._literal()]
        while self.cur.kind == "punct" and self.cur.text == ",":
            self.advance()
            items.append(self._literal())
        self._expect_punct("]")
        return SetLiteral(tuple(items))

    def _expect_punct(self, ch: str) -> None:
        if self.cur.kind == "punct" and self.cur.text == ch:
            self.advance()
            return
        self.fail(f"expected {ch!r}", expected=ch)


def _unescape(quoted: str) -> str:
    body = quoted[1:-1]
    return body.replace('\\"', '"').replace("\\\\", "\\")


def parse_rule(text: str) -> RuleExpr:
    """Parse one rule statement; raises parse-error with line/column."""
    if not text.strip():
        raise ParseError("empty rule text", 1, 1, expected="statement")
    return _Parser(_tokenize(text)).statement()
