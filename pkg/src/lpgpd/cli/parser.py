"""Recursive-descent parser for algebra expressions.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (['*'] unary)*          # juxtaposition also multiplies
    unary  := '-' unary | factor
    factor := scalar | atom | '(' expr ')'
    scalar := NUMBER ['i'] | 'i'
    atom   := 'chi[' NAME ']' | 'delta[' ID ']' | 's' DIGIT ["'"]

``chi``/``delta`` resolve against a groupoid context, ``s<j>`` against a
Leavitt context.  Scalars become multiples of the unit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..convolution import AlgebraElement, chi, delta, unit_element
from ..cuntz import CuntzWord, LeavittPolynomial
from ..errors import ExpressionSyntaxError, UnknownName
from ..groupoid import FiniteGroupoid, Slice, label, unit_slice


# -- AST -----------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: complex


@dataclass(frozen=True)
class Atom:
    kind: str      # "chi", "delta" or "s"
    name: str
    star: bool = False


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Neg:
    arg: object


_NUM = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0

    def error(self, msg):
        raise ExpressionSyntaxError(msg, self.pos)

    def skip(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip()
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def eat(self, ch):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def parse(self):
        if not self.peek():
            self.error("empty expression")
        node = self.expr()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.src[self.pos]
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def _starts_factor(self):
        c = self.peek()
        return bool(c) and (c.isdigit() or c in "(.is" or self.src.startswith(("chi", "delta"), self.pos))

    def term(self):
        node = self.unary()
        while True:
            if self.peek() == "*":
                self.pos += 1
                node = BinOp("*", node, self.unary())
            elif self._starts_factor():
                node = BinOp("*", node, self.unary())
            else:
                return node

    def unary(self):
        if self.peek() == "-":
            self.pos += 1
            return Neg(self.unary())
        return self.factor()

    def bracket(self):
        self.eat("[")
        end = self.src.find("]", self.pos)
        if end < 0:
            self.error("unclosed '['")
        name = self.src[self.pos:end].strip()
        if not name:
            self.error("empty name")
        self.pos = end + 1
        return name

    def factor(self):
        c = self.peek()
        if c == "(":
            self.pos += 1
            node = self.expr()
            self.eat(")")
            return node
        m = _NUM.match(self.src, self.pos)
        if m and m.group(0):
            self.pos = m.end()
            v = float(m.group(0))
            if self.src[self.pos:self.pos + 1] == "i" and not self.src[self.pos + 1:self.pos + 2].isalnum():
                self.pos += 1
                return Num(complex(0, v))
            return Num(complex(v))
        if self.src.startswith("chi", self.pos):
            self.pos += 3
            return Atom("chi", self.bracket())
        if self.src.startswith("delta", self.pos):
            self.pos += 5
            return Atom("delta", self.bracket())
        if c == "s":
            self.pos += 1
            if not self.src[self.pos:self.pos + 1].isdigit():
                self.error("expected a digit after 's'")
            j = self.src[self.pos]
            self.pos += 1
            star = self.src[self.pos:self.pos + 1] == "'"
            if star:
                self.pos += 1
            return Atom("s", j, star)
        if c == "i" and not self.src[self.pos + 1:self.pos + 2].isalnum():
            self.pos += 1
            return Num(1j)
        self.error(f"unexpected {c!r}" if c else "unexpected end of input")


def parse(src: str):
    return _Parser(src).parse()


def _fmt_num(z: complex) -> str:
    def r(x):
        return repr(float(x)).removesuffix(".0") if float(x).is_integer() else repr(float(x))

    if z.imag == 0:
        return r(z.real)
    if z.real == 0:
        return "i" if z.imag == 1 else f"{r(z.imag)}i"
    return f"({r(z.real)} + {r(z.imag)}i)" if z.imag > 0 else f"({r(z.real)} - {r(-z.imag)}i)"


def pretty(node) -> str:
    """Canonical text form; ``pretty(parse(pretty(t))) == pretty(t)``."""
    if isinstance(node, Num):
        if node.value.imag == 0 and node.value.real < 0:
            return f"-{_fmt_num(-node.value)}"
        return _fmt_num(node.value)
    if isinstance(node, Atom):
        if node.kind == "s":
            return f"s{node.name}" + ("'" if node.star else "")
        return f"{node.kind}[{node.name}]"
    if isinstance(node, Neg):
        inner = pretty(node.arg)
        return f"-({inner})" if isinstance(node.arg, BinOp) and node.arg.op in "+-" else f"-{inner}"
    if isinstance(node, BinOp):
        left, right = pretty(node.left), pretty(node.right)
        if node.op == "*":
            if isinstance(node.left, BinOp) and node.left.op in "+-":
                left = f"({left})"
            if isinstance(node.right, BinOp) or isinstance(node.right, Neg):
                right = f"({right})"
            return f"{left}*{right}"
        if isinstance(node.right, BinOp) and node.right.op in "+-":
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(node)


def normalize(src: str) -> str:
    return pretty(parse(src))


# -- resolution ----------------------------------------------------------------

class AlgebraContext:
    """Names for ``chi[...]`` (slices, plus the built-in ``G0``) and ``delta[...]`` (arrow labels)."""

    def __init__(self, groupoid: FiniteGroupoid, slices: dict | None = None):
        self.groupoid = groupoid
        self.slices = {"G0": unit_slice(groupoid)}
        self.slices.update(slices or {})
        self.arrows = {label(a): a for a in groupoid.arrows}

    def scalar(self, c):
        return c * unit_element(self.groupoid)

    def atom(self, node: Atom):
        if node.kind == "chi":
            S = self.slices.get(node.name)
            if S is None:
                raise UnknownName(f"unknown slice {node.name!r}")
            return chi(S.check() if isinstance(S, Slice) else S)
        if node.kind == "delta":
            a = self.arrows.get(node.name.replace(" ", ""))
            if a is None:
                raise UnknownName(f"unknown arrow {node.name!r}")
            return delta(self.groupoid, a)
        raise UnknownName(f"generator s{node.name} needs a Leavitt context")


class LeavittContext:
    def __init__(self, d: int):
        self.d = d

    def scalar(self, c):
        return LeavittPolynomial.scalar(self.d, c)

    def atom(self, node: Atom):
        if node.kind != "s":
            raise UnknownName(f"{node.kind}[...] is not available in a Leavitt context")
        j = int(node.name)
        if j >= self.d:
            raise UnknownName(f"s{j} does not exist for d={self.d}")
        return LeavittPolynomial.word(self.d, CuntzWord.gen(j, node.star))


def evaluate(node, ctx):
    if isinstance(node, Num):
        return ctx.scalar(node.value)
    if isinstance(node, Atom):
        return ctx.atom(node)
    if isinstance(node, Neg):
        return -evaluate(node.arg, ctx)
    if isinstance(node, BinOp):
        a, b = evaluate(node.left, ctx), evaluate(node.right, ctx)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        return a * b
    raise TypeError(node)


def parse_expression(src: str, ctx) -> AlgebraElement | LeavittPolynomial:
    return evaluate(parse(src), ctx)
