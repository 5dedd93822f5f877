"""Minimal arithmetic-expression parser for closed-form radial potentials.

Grammar (whitespace between tokens is ignored)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | "z" | FUNC "(" expr ")" | "(" expr ")"
    FUNC   := "log" | "exp" | "sqrt"
    NUMBER := DIGITS ["." DIGITS] [("e" | "E") ["+" | "-"] DIGITS]
            | "." DIGITS [("e" | "E") ["+" | "-"] DIGITS]

``^`` is right-associative and binds tighter than unary minus, so ``-z^2``
means ``-(z^2)`` and ``2^-1`` is ``0.5``. The only variable is ``z``.

A compiled expression is a plain callable that works on floats, numpy
arrays, :class:`~kahler_compact.jets.Taylor` and :class:`~kahler_compact.jets.Jet`.
"""

from __future__ import annotations

import re
from typing import Callable

from . import jets
from .errors import ExpressionError

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]+)|(?P<op>[-+*/^()]))"
)

FUNCTIONS: dict[str, Callable] = {"log": jets.log, "exp": jets.exp, "sqrt": jets.sqrt}


def tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExpressionError(f"unexpected character {text[pos:].strip()[:1]!r} at offset {pos}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None:
            raise ExpressionError("unexpected end of expression")
        if value is not None and tok[1] != value:
            raise ExpressionError(f"expected {value!r}, found {tok[1]!r}")
        self.i += 1
        return tok

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = (op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            node = (op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            operand = self.unary()
            return ("neg", operand) if op == "-" else operand
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            return ("^", base, self.unary())
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return ("num", float(val))
        if kind == "name":
            if val == "z":
                return ("z",)
            if val in FUNCTIONS:
                self.take("(")
                arg = self.expr()
                self.take(")")
                return ("call", val, arg)
            raise ExpressionError(f"unknown name {val!r}")
        if val == "(":
            node = self.expr()
            self.take(")")
            return node
        raise ExpressionError(f"unexpected token {val!r}")


def parse(text: str):
    """Parse to a small tuple-based syntax tree."""
    toks = tokenize(text)
    if not toks:
        raise ExpressionError("empty expression")
    p = _Parser(toks)
    tree = p.expr()
    if p.i != len(toks):
        raise ExpressionError(f"trailing input starting at {toks[p.i][1]!r}")
    return tree


def _build(node) -> Callable:
    tag = node[0]
    if tag == "num":
        c = node[1]
        return lambda z: c
    if tag == "z":
        return lambda z: z
    if tag == "neg":
        f = _build(node[1])
        return lambda z: -f(z)
    if tag == "call":
        fn, arg = FUNCTIONS[node[1]], _build(node[2])
        return lambda z: fn(arg(z))
    a, b = _build(node[1]), _build(node[2])
    if tag == "+":
        return lambda z: a(z) + b(z)
    if tag == "-":
        return lambda z: a(z) - b(z)
    if tag == "*":
        return lambda z: a(z) * b(z)
    if tag == "/":
        return lambda z: a(z) / b(z)
    if tag == "^":
        exponent = node[2]
        if exponent[0] == "num" or (exponent[0] == "neg" and exponent[1][0] == "num"):
            e = exponent[1] if exponent[0] == "num" else -exponent[1][1]
            return lambda z: a(z) ** e
        return lambda z: a(z) ** b(z)
    raise ExpressionError(f"bad node {node!r}")


def compile_expression(text: str) -> Callable:
    return _build(parse(text))
