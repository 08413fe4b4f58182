"""First-order logic of (d+1)-uniform hypergraphs.

One relation symbol: E(x_0, ..., x_d) holds when the values form an edge (a
set of d+1 distinct vertices), so atoms with repeated values are false
rather than errors.  Equality, the usual connectives, and vertex
quantification complete the language.

Concrete syntax: `forall x.`, `exists x.` (the body extends as far right as
possible), `!`, `&`, `|`, `->` (right-associative, lowest precedence),
`E(x,y,...)`, `x = y`, parentheses.  Evaluation is the textbook recursion
and costs O(n^depth).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .hypercore import Hypergraph

__all__ = [
    "Formula",
    "EdgeAtom",
    "Eq",
    "Not",
    "And",
    "Or",
    "Implies",
    "Forall",
    "Exists",
    "ParseError",
    "EvaluationError",
    "parse",
    "quantifier_depth",
    "free_variables",
    "evaluate",
]


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} (at offset {position})")


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class EdgeAtom:
    args: tuple[str, ...]

    def __str__(self) -> str:
        return f"E({','.join(self.args)})"


@dataclass(frozen=True)
class Eq:
    left: str
    right: str

    def __str__(self) -> str:
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class Not:
    sub: "Formula"

    def __str__(self) -> str:
        return f"!({self.sub})"


@dataclass(frozen=True)
class And:
    items: tuple["Formula", ...]

    def __str__(self) -> str:
        return "(" + " & ".join(str(x) for x in self.items) + ")"


@dataclass(frozen=True)
class Or:
    items: tuple["Formula", ...]

    def __str__(self) -> str:
        return "(" + " | ".join(str(x) for x in self.items) + ")"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"({self.left} -> {self.right})"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"

    def __str__(self) -> str:
        return f"forall {self.var}. {self.body}"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"

    def __str__(self) -> str:
        return f"exists {self.var}. {self.body}"


Formula = EdgeAtom | Eq | Not | And | Or | Implies | Forall | Exists


_TOKEN = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<punct>[().,&|!=])|(?P<word>[A-Za-z_][A-Za-z_0-9]*))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", pos)
        if m.group("arrow"):
            out.append(("->", "->", m.start("arrow")))
        elif m.group("punct"):
            out.append((m.group("punct"), m.group("punct"), m.start("punct")))
        else:
            word = m.group("word")
            kind = word if word in ("forall", "exists") else "name"
            out.append((kind, word, m.start("word")))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, tokens: list[tuple[str, str, int]], d: int):
        self.toks = tokens
        self.i = 0
        self.d = d

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def take(self, kind: str) -> tuple[str, str, int]:
        tok = self.toks[self.i]
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        self.i += 1
        return tok

    def parse_formula(self) -> Formula:
        left = self.parse_or()
        if self.peek()[0] == "->":
            self.take("->")
            right = self.parse_formula()
            return Implies(left, right)
        return left

    def parse_or(self) -> Formula:
        items = [self.parse_and()]
        while self.peek()[0] == "|":
            self.take("|")
            items.append(self.parse_and())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def parse_and(self) -> Formula:
        items = [self.parse_unary()]
        while self.peek()[0] == "&":
            self.take("&")
            items.append(self.parse_unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def parse_unary(self) -> Formula:
        kind, value, pos = self.peek()
        if kind == "!":
            self.take("!")
            return Not(self.parse_unary())
        if kind in ("forall", "exists"):
            self.take(kind)
            var = self.take("name")[1]
            if var == "E":
                raise ParseError("'E' is the edge relation, not a variable", pos)
            self.take(".")
            body = self.parse_formula()
            return Forall(var, body) if kind == "forall" else Exists(var, body)
        if kind == "(":
            self.take("(")
            inner = self.parse_formula()
            self.take(")")
            return inner
        if kind == "name":
            return self.parse_atom()
        raise ParseError(f"unexpected token {value!r}", pos)

    def parse_atom(self) -> Formula:
        kind, value, pos = self.take("name")
        if value == "E":
            self.take("(")
            args = [self.take("name")[1]]
            while self.peek()[0] == ",":
                self.take(",")
                args.append(self.take("name")[1])
            self.take(")")
            if len(args) != self.d + 1:
                raise ParseError(
                    f"edge atom takes {self.d + 1} arguments for d={self.d}, got {len(args)}",
                    pos,
                )
            return EdgeAtom(tuple(args))
        self.take("=")
        right = self.take("name")[1]
        return Eq(value, right)


def parse(text: str, d: int) -> Formula:
    """Parse the documented grammar; errors carry the source offset."""
    if d < 1:
        raise ValueError("d must be >= 1")
    parser = _Parser(_tokenize(text), d)
    formula = parser.parse_formula()
    parser.take("end")
    return formula


def quantifier_depth(formula: Formula) -> int:
    if isinstance(formula, (EdgeAtom, Eq)):
        return 0
    if isinstance(formula, Not):
        return quantifier_depth(formula.sub)
    if isinstance(formula, (And, Or)):
        return max(quantifier_depth(x) for x in formula.items)
    if isinstance(formula, Implies):
        return max(quantifier_depth(formula.left), quantifier_depth(formula.right))
    return 1 + quantifier_depth(formula.body)


def free_variables(formula: Formula) -> frozenset[str]:
    if isinstance(formula, EdgeAtom):
        return frozenset(formula.args)
    if isinstance(formula, Eq):
        return frozenset((formula.left, formula.right))
    if isinstance(formula, Not):
        return free_variables(formula.sub)
    if isinstance(formula, (And, Or)):
        out: frozenset[str] = frozenset()
        for x in formula.items:
            out |= free_variables(x)
        return out
    if isinstance(formula, Implies):
        return free_variables(formula.left) | free_variables(formula.right)
    return free_variables(formula.body) - {formula.var}


def evaluate(
    H: Hypergraph, formula: Formula, assignment: Mapping[str, int] | None = None
) -> bool:
    """Tarskian truth value over H; raises on unbound variables."""
    edge_set = {frozenset(int(v) for v in row) for row in H.edges}
    env = dict(assignment or {})

    def look(var: str) -> int:
        if var not in env:
            raise EvaluationError(f"unbound variable {var!r}")
        return env[var]

    def rec(f: Formula) -> bool:
        if isinstance(f, EdgeAtom):
            vals = [look(a) for a in f.args]
            return len(set(vals)) == H.d + 1 and frozenset(vals) in edge_set
        if isinstance(f, Eq):
            return look(f.left) == look(f.right)
        if isinstance(f, Not):
            return not rec(f.sub)
        if isinstance(f, And):
            return all(rec(x) for x in f.items)
        if isinstance(f, Or):
            return any(rec(x) for x in f.items)
        if isinstance(f, Implies):
            return (not rec(f.left)) or rec(f.right)
        if isinstance(f, Forall):
            saved = env.get(f.var)
            had = f.var in env
            try:
                for v in range(H.n):
                    env[f.var] = v
                    if not rec(f.body):
                        return False
                return True
            finally:
                if had:
                    env[f.var] = saved  # type: ignore[assignment]
                else:
                    env.pop(f.var, None)
        if isinstance(f, Exists):
            saved = env.get(f.var)
            had = f.var in env
            try:
                for v in range(H.n):
                    env[f.var] = v
                    if rec(f.body):
                        return True
                return False
            finally:
                if had:
                    env[f.var] = saved  # type: ignore[assignment]
                else:
                    env.pop(f.var, None)
        raise TypeError(f"not a formula: {f!r}")

    return rec(formula)
