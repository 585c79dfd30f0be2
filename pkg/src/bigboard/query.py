"""Functional query language for dynamic overlays.

Operators highlight arbitrary slices of the asset inventory ("hosts with
unpatched Java", everything in Australia, a suspicious CIDR range) by
saving boolean queries over asset tags, hostnames, and addresses. The
grammar, fixed for wire compatibility:

    expr   := term (OR term)*
    term   := factor (AND factor)*
    factor := NOT factor | "(" expr ")" | atom
    atom   := ("geo" | "tag" | "host" | "ip") ":" value
    value  := quoted string | CIDR (for ip)

Keywords and field names are case-insensitive. Quoted strings support
backslash escapes. ``format_query`` produces the canonical spelling; the
parser is a fixed point over it (parse -> print -> parse is identity).

Atom semantics over an asset:
  geo / tag  case-insensitive membership in geo_tags / function_tags
  host       glob match on the hostname (case-insensitive)
  ip         true when any of the asset's addresses lies in the CIDR range

NOT complements against the full asset set of the topology.
"""

from __future__ import annotations

import ipaddress
import json
import re
from dataclasses import dataclass
from fnmatch import fnmatchcase
from functools import cached_property, lru_cache
from typing import Union

from .errors import QueryError
from .topology import Topology

QueryExpr = Union["GeoAtom", "TagAtom", "HostAtom", "CidrAtom", "Not", "And", "Or"]


@dataclass(frozen=True)
class GeoAtom:
    value: str


@dataclass(frozen=True)
class TagAtom:
    value: str


@dataclass(frozen=True)
class HostAtom:
    pattern: str


@dataclass(frozen=True)
class CidrAtom:
    cidr: str  # normalized, e.g. "194.220.1.0/24"


@dataclass(frozen=True)
class Not:
    operand: QueryExpr


@dataclass(frozen=True)
class And:
    left: QueryExpr
    right: QueryExpr


@dataclass(frozen=True)
class Or:
    left: QueryExpr
    right: QueryExpr


@dataclass(frozen=True)
class FunctionalQuery:
    """A saved overlay query with its display color and active flag."""

    id: str
    label: str
    expression: QueryExpr
    color: str
    active: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "label": self.label,
            "expression": format_query(self.expression),
            "color": self.color,
            "active": self.active,
        }

    @cached_property
    def canonical(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<colon>:)
  | (?P<quoted>"(?:\\.|[^"\\])*")
  | (?P<word>[A-Za-z0-9_.\-/*?\[\]]+)
    """,
    re.VERBOSE,
)

_FIELDS = ("geo", "tag", "host", "ip")
_KEYWORDS = ("and", "or", "not")


@dataclass(frozen=True)
class _Token:
    kind: str  # lparen | rparen | colon | quoted | word | end
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QueryError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


def _unescape(quoted: str) -> str:
    body = quoted[1:-1]
    out = []
    i = 0
    while i < len(body):
        if body[i] == "\\" and i + 1 < len(body):
            out.append(body[i + 1])
            i += 2
        else:
            out.append(body[i])
            i += 1
    return "".join(out)


def _escape(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


# ---------------------------------------------------------------------------
# Parser (recursive descent, left-associative binary nodes)


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def is_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "word" and tok.text.lower() == word

    def parse(self) -> QueryExpr:
        expr = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise QueryError(f"unexpected trailing input {tok.text!r}", tok.pos)
        return expr

    def expr(self) -> QueryExpr:
        node = self.term()
        while self.is_keyword("or"):
            self.next()
            node = Or(node, self.term())
        return node

    def term(self) -> QueryExpr:
        node = self.factor()
        while self.is_keyword("and"):
            self.next()
            node = And(node, self.factor())
        return node

    def factor(self) -> QueryExpr:
        tok = self.peek()
        if self.is_keyword("not"):
            self.next()
            return Not(self.factor())
        if tok.kind == "lparen":
            self.next()
            node = self.expr()
            closing = self.next()
            if closing.kind != "rparen":
                raise QueryError("expected ')'", closing.pos)
            return node
        return self.atom()

    def atom(self) -> QueryExpr:
        tok = self.next()
        if tok.kind != "word" or tok.text.lower() not in _FIELDS:
            raise QueryError(f"expected an atom field (geo/tag/host/ip), got {tok.text!r}", tok.pos)
        field = tok.text.lower()
        colon = self.next()
        if colon.kind != "colon":
            raise QueryError("expected ':' after atom field", colon.pos)
        value = self.next()
        if field == "ip":
            if value.kind != "word":
                raise QueryError("invalid CIDR: expected an unquoted a.b.c.d/len value", value.pos)
            return CidrAtom(_normalize_cidr(value.text, value.pos))
        if value.kind != "quoted":
            raise QueryError(f"expected a quoted string value for '{field}:'", value.pos)
        text = _unescape(value.text)
        if field == "geo":
            return GeoAtom(text)
        if field == "tag":
            return TagAtom(text)
        return HostAtom(text)


def _normalize_cidr(text: str, pos: int) -> str:
    try:
        net = ipaddress.IPv4Network(text, strict=False)
    except (ipaddress.AddressValueError, ipaddress.NetmaskValueError, ValueError) as exc:
        raise QueryError(f"invalid CIDR {text!r}: {exc}", pos) from None
    return net.with_prefixlen


def parse_query(text: str) -> QueryExpr:
    """Parse a query string; raises QueryError with a character position."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Canonical printer

# Precedence: OR=1, AND=2, NOT=3, atoms=4. A node is parenthesized when it
# appears in a context requiring higher precedence than its own.


def format_query(expr: QueryExpr) -> str:
    return _format(expr, 0)


def _format(expr: QueryExpr, context: int) -> str:
    if isinstance(expr, Or):
        body, prec = f"{_format(expr.left, 1)} OR {_format(expr.right, 2)}", 1
    elif isinstance(expr, And):
        body, prec = f"{_format(expr.left, 2)} AND {_format(expr.right, 3)}", 2
    elif isinstance(expr, Not):
        body, prec = f"NOT {_format(expr.operand, 3)}", 3
    elif isinstance(expr, GeoAtom):
        body, prec = f"geo:{_escape(expr.value)}", 4
    elif isinstance(expr, TagAtom):
        body, prec = f"tag:{_escape(expr.value)}", 4
    elif isinstance(expr, HostAtom):
        body, prec = f"host:{_escape(expr.pattern)}", 4
    elif isinstance(expr, CidrAtom):
        body, prec = f"ip:{expr.cidr}", 4
    else:
        raise TypeError(f"not a query expression: {expr!r}")
    return f"({body})" if prec < context else body


# ---------------------------------------------------------------------------
# Evaluator


@lru_cache(maxsize=1024)
def _cidr_range(cidr: str) -> tuple[int, int]:
    net = ipaddress.IPv4Network(cidr)
    return int(net.network_address), int(net.broadcast_address)


def evaluate_query(expr: QueryExpr, topology: Topology) -> frozenset[str]:
    """Asset ids matching the expression. Pure; never raises on a parsed tree."""
    if isinstance(expr, Or):
        return evaluate_query(expr.left, topology) | evaluate_query(expr.right, topology)
    if isinstance(expr, And):
        return evaluate_query(expr.left, topology) & evaluate_query(expr.right, topology)
    if isinstance(expr, Not):
        return topology.all_asset_ids - evaluate_query(expr.operand, topology)

    # Atoms rescan the inventory, so equal atoms share one result per topology.
    cache = topology.atom_cache
    hit = cache.get(expr)
    if hit is None:
        hit = cache[expr] = _evaluate_atom(expr, topology)
    return hit


def _evaluate_atom(expr: QueryExpr, topology: Topology) -> frozenset[str]:
    if isinstance(expr, GeoAtom):
        want = expr.value.lower()
        tags = topology.geo_tags_lower
        return frozenset(aid for aid in topology.all_asset_ids if want in tags[aid])
    if isinstance(expr, TagAtom):
        want = expr.value.lower()
        tags = topology.function_tags_lower
        return frozenset(aid for aid in topology.all_asset_ids if want in tags[aid])
    if isinstance(expr, HostAtom):
        pattern = expr.pattern.lower()
        return frozenset(
            a.id for a in topology.assets_by_id.values() if fnmatchcase(a.hostname.lower(), pattern)
        )
    if isinstance(expr, CidrAtom):
        lo, hi = _cidr_range(expr.cidr)
        addrs = topology.address_ints
        return frozenset(
            aid for aid in topology.all_asset_ids if any(lo <= n <= hi for n in addrs[aid])
        )
    raise TypeError(f"not a query expression: {expr!r}")
