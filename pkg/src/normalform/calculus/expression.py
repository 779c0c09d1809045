"""A small expression language for maps between coordinate spaces.

Grammar::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('+' | '-') unary | power
    power := atom ('^' ['+' | '-'] INTEGER)?
    atom  := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

with ``FUNC`` one of ``sin``, ``cos``, ``exp``.  Parsed trees are compiled to
closures that accept floats, numpy arrays (batch evaluation) or dual numbers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import DomainError, ParseError, UndeclaredVariable
from .dual import Dual, dcos, dexp, dsin

FUNCTIONS = {"sin": dsin, "cos": dcos, "exp": dexp}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^(),]))"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(Token(kind, m.group(kind), start))
        pos = m.end()
    tokens.append(Token("end", "", n))
    return tokens


# --- syntax tree -------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str
    index: int


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


class _Parser:
    def __init__(self, source: str, variables: Sequence[str]):
        self.tokens = tokenize(source)
        self.i = 0
        self.vars = {v: k for k, v in enumerate(variables)}

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind == "end":
            found = self.tok.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", self.tok.pos)
        return self.advance()

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected token {self.tok.text!r}", self.tok.pos)
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            arg = self.unary()
            return Neg(arg) if op == "-" else arg
        return self.power()

    def power(self):
        node = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            sign = 1
            if self.tok.kind == "op" and self.tok.text in "+-":
                sign = -1 if self.advance().text == "-" else 1
            t = self.tok
            if t.kind != "num" or not t.text.isdigit():
                raise ParseError("exponent must be an integer literal", t.pos)
            self.advance()
            node = Pow(node, sign * int(t.text))
        return node

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "name":
            self.advance()
            if t.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(t.text, arg)
            if t.text not in self.vars:
                raise UndeclaredVariable(t.text, t.pos)
            return Var(t.text, self.vars[t.text])
        if t.kind == "op" and t.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = t.text or "end of input"
        raise ParseError(f"unexpected token {found!r}", t.pos)


def parse(source: str, variables: Sequence[str]):
    """Parse one scalar expression over the given variable names."""
    return _Parser(source, variables).parse()


# --- compilation -------------------------------------------------------------


def _is_zero(v) -> bool:
    if isinstance(v, Dual):
        return v.val == 0.0
    return bool(np.any(np.asarray(v) == 0.0))


def compile_node(node) -> Callable[[Sequence], object]:
    if isinstance(node, Num):
        c = node.value
        return lambda env: c
    if isinstance(node, Var):
        k = node.index
        return lambda env: env[k]
    if isinstance(node, Neg):
        f = compile_node(node.arg)
        return lambda env: -f(env)
    if isinstance(node, Pow):
        f = compile_node(node.base)
        n = node.exponent

        def power(env):
            b = f(env)
            if n < 0 and _is_zero(b):
                raise DomainError("negative power of zero")
            if isinstance(b, Dual):
                return b**n
            return np.asarray(b, dtype=float) ** n if np.ndim(b) else float(b) ** n

        return power
    if isinstance(node, Call):
        f = compile_node(node.arg)
        g = FUNCTIONS[node.func]
        return lambda env: g(f(env))
    if isinstance(node, BinOp):
        a, b = compile_node(node.left), compile_node(node.right)
        if node.op == "+":
            return lambda env: a(env) + b(env)
        if node.op == "-":
            return lambda env: a(env) - b(env)
        if node.op == "*":
            return lambda env: a(env) * b(env)

        def divide(env):
            den = b(env)
            if _is_zero(den):
                raise DomainError("division by zero")
            return a(env) / den

        return divide
    raise TypeError(f"unknown node {node!r}")


def node_to_str(node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{node_to_str(node.arg)})"
    if isinstance(node, Pow):
        return f"({node_to_str(node.base)})^{node.exponent}"
    if isinstance(node, Call):
        return f"{node.func}({node_to_str(node.arg)})"
    return f"({node_to_str(node.left)} {node.op} {node_to_str(node.right)})"
