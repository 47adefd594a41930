"""Text parser for the filter DSL.

Grammar (keywords case-insensitive):

    filter      = [ expr ] EOF
    expr        = clause { AND clause }
    clause      = group | atom
    group       = "(" range { OR range } ")"          all ranges: one property
    atom        = range | IDENT op value
    range       = IDENT IN "[" number "," number "]"
    op          = "<" | ">" | "<=" | ">=" | "="
    value       = number | IDENT | STRING             non-numeric only for
                                                      categorical fields

After parsing, a pair of ">=" and "<=" atoms on the same property coalesces
into a single-interval RangeUnion, so `p >= a and p <= b` and `p in [a, b]`
produce the same structure. A hand-written scanner keeps every token's line
and column so errors carry exact positions and the set of expected tokens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError
from .ast import (
    CATEGORICAL_FIELDS,
    Atom,
    CategoricalEq,
    Comparison,
    FilterExpr,
    RangeUnion,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*"|'[^'\n]*')
  | (?P<op><=|>=|<|>|=)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<lbracket>\[)
  | (?P<rbracket>\])
  | (?P<comma>,)
    """,
    re.VERBOSE,
)

_KEYWORDS = ("and", "or", "in")


@dataclass(frozen=True)
class _Token:
    kind: str      # number | ident | string | op | lparen | ... | and | or | in | eof
    text: str
    line: int
    column: int


def _scan(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ParseError(f"unexpected character {source[pos]!r}",
                             line, pos - line_start + 1)
        kind = match.lastgroup
        text = match.group()
        column = pos - line_start + 1
        if kind == "ws":
            for i, ch in enumerate(text):
                if ch == "\n":
                    line += 1
                    line_start = pos + i + 1
        else:
            if kind == "ident" and text.lower() in _KEYWORDS:
                kind = text.lower()
            tokens.append(_Token(kind, text, line, column))
        pos = match.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


@dataclass
class _RawAtom:
    atom: Atom
    line: int
    column: int


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self._tokens = tokens
        self._pos = 0

    def _peek(self) -> _Token:
        return self._tokens[self._pos]

    def _advance(self) -> _Token:
        token = self._tokens[self._pos]
        self._pos += 1
        return token

    def _expect(self, kind: str, expected: str) -> _Token:
        token = self._peek()
        if token.kind != kind:
            raise ParseError(f"unexpected {self._describe(token)}",
                             token.line, token.column, frozenset({expected}))
        return self._advance()

    @staticmethod
    def _describe(token: _Token) -> str:
        return "end of input" if token.kind == "eof" else f"token {token.text!r}"

    def parse(self) -> FilterExpr:
        if self._peek().kind == "eof":
            return FilterExpr(())
        atoms = self._expr()
        token = self._peek()
        if token.kind != "eof":
            raise ParseError(f"unexpected {self._describe(token)}",
                             token.line, token.column,
                             frozenset({"'and'", "end of input"}))
        return _assemble(atoms)

    def _expr(self) -> list[_RawAtom]:
        atoms = [*self._clause()]
        while self._peek().kind == "and":
            self._advance()
            atoms.extend(self._clause())
        return atoms

    def _clause(self) -> list[_RawAtom]:
        if self._peek().kind == "lparen":
            return [self._group()]
        return [self._atom()]

    def _group(self) -> _RawAtom:
        opening = self._expect("lparen", "'('")
        first_token = self._peek()
        key, interval = self._range_atom()
        intervals = [interval]
        while self._peek().kind == "or":
            self._advance()
            next_token = self._peek()
            next_key, next_interval = self._range_atom()
            if next_key != key:
                raise ParseError(
                    f"'or' may only join ranges of one property, got {key!r} and {next_key!r}",
                    next_token.line, next_token.column)
            intervals.append(next_interval)
        self._expect("rparen", "')'")
        self._check_intervals(key, intervals, first_token)
        return _RawAtom(RangeUnion(key, tuple(intervals)),
                        opening.line, opening.column)

    def _range_atom(self) -> tuple[str, tuple[float, float]]:
        ident = self._expect("ident", "property name")
        token = self._peek()
        if token.kind != "in":
            raise ParseError(f"unexpected {self._describe(token)}",
                             token.line, token.column, frozenset({"'in'"}))
        self._advance()
        self._expect("lbracket", "'['")
        lo = float(self._expect("number", "number").text)
        self._expect("comma", "','")
        hi = float(self._expect("number", "number").text)
        self._expect("rbracket", "']'")
        return ident.text, (lo, hi)

    @staticmethod
    def _check_intervals(key: str, intervals: list[tuple[float, float]],
                         token: _Token) -> None:
        for lo, hi in intervals:
            if lo > hi:
                raise ParseError(f"empty interval [{lo}, {hi}] for property {key!r}",
                                 token.line, token.column)

    def _atom(self) -> _RawAtom:
        ident = self._expect("ident", "property name")
        token = self._peek()
        if token.kind == "in":
            self._pos -= 1
            start = self._peek()
            key, interval = self._range_atom()
            self._check_intervals(key, [interval], start)
            return _RawAtom(RangeUnion(key, (interval,)), start.line, start.column)
        if token.kind != "op":
            raise ParseError(f"unexpected {self._describe(token)}",
                             token.line, token.column,
                             frozenset({"comparison operator", "'in'"}))
        op_token = self._advance()
        value = self._peek()
        if ident.text.lower() in CATEGORICAL_FIELDS:
            if op_token.text != "=":
                raise ParseError(
                    f"field {ident.text!r} only supports '='",
                    op_token.line, op_token.column, frozenset({"'='"}))
            if value.kind not in ("ident", "string", "number"):
                raise ParseError(f"unexpected {self._describe(value)}",
                                 value.line, value.column, frozenset({"value"}))
            self._advance()
            text = value.text[1:-1] if value.kind == "string" else value.text
            return _RawAtom(CategoricalEq(CATEGORICAL_FIELDS[ident.text.lower()], text),
                            ident.line, ident.column)
        if value.kind != "number":
            raise ParseError(f"unexpected {self._describe(value)}",
                             value.line, value.column, frozenset({"number"}))
        self._advance()
        return _RawAtom(Comparison(ident.text, op_token.text, float(value.text)),
                        ident.line, ident.column)


def _assemble(raw: list[_RawAtom]) -> FilterExpr:
    """Coalesce >=/<= pairs into ranges and reject duplicate range unions."""
    atoms: list[_RawAtom | None] = list(raw)
    union_keys = {item.atom.key for item in raw if isinstance(item.atom, RangeUnion)}

    by_key: dict[str, dict[str, list[int]]] = {}
    for index, item in enumerate(raw):
        if isinstance(item.atom, Comparison) and item.atom.op in (">=", "<="):
            by_key.setdefault(item.atom.key, {">=": [], "<=": []})[item.atom.op].append(index)

    for key, sides in by_key.items():
        if key in union_keys:
            continue
        if len(sides[">="]) == 1 and len(sides["<="]) == 1:
            lo_idx, hi_idx = sides[">="][0], sides["<="][0]
            lo = raw[lo_idx].atom.threshold
            hi = raw[hi_idx].atom.threshold
            if lo > hi:
                continue  # contradictory pair stays as two comparisons
            first, second = min(lo_idx, hi_idx), max(lo_idx, hi_idx)
            atoms[first] = _RawAtom(RangeUnion(key, ((lo, hi),)),
                                    raw[first].line, raw[first].column)
            atoms[second] = None

    seen_union: dict[str, _RawAtom] = {}
    result: list[Atom] = []
    for item in atoms:
        if item is None:
            continue
        if isinstance(item.atom, RangeUnion):
            if item.atom.key in seen_union:
                raise ParseError(
                    f"property {item.atom.key!r} already constrained by a range union",
                    item.line, item.column)
            seen_union[item.atom.key] = item
        result.append(item.atom)
    return FilterExpr(tuple(result))


def parse_filter(source: str) -> FilterExpr:
    """Parse DSL text into a FilterExpr; empty text matches everything."""
    return _Parser(_scan(source)).parse()
