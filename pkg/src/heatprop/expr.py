"""Closed-form coefficient expressions.

A tiny expression language covering what the coefficient functions need:
numeric constants, named variables (``t`` by default), ``+ - * /``, powers
with constant exponents (``^`` or ``**``) and the functions ``sin``, ``cos``,
``sinh``, ``cosh``, ``tanh`` and ``exp``.  ``pi`` and ``e`` are predefined
constants.

Expressions are parsed into an immutable tree, differentiated symbolically,
printed back to a parseable string and compiled into Python callables (a
``math`` based scalar path and a ``numpy`` based vector path).

>>> e = parse_coeff_expr("0.5*sinh(2*t)")
>>> round(e(1.0), 6)
1.81343
>>> str(differentiate(parse_coeff_expr("sinh(2*t)")))
'(2.0 * cosh((2.0 * t)))'
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import CoefficientDomainError, ExprSyntaxError

FUNCTIONS = ("sin", "cos", "sinh", "cosh", "tanh", "exp")
CONSTANTS = {"pi": math.pi, "e": math.e}


# ---------------------------------------------------------------------------
# tree


class Node:
    """Base class of expression tree nodes."""

    __slots__ = ()

    def free_vars(self) -> frozenset:
        return frozenset()


@dataclass(frozen=True)
class Const(Node):
    value: float

    def __str__(self):
        return repr(float(self.value))


@dataclass(frozen=True)
class Var(Node):
    name: str

    def free_vars(self):
        return frozenset((self.name,))

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg(Node):
    arg: Node

    def free_vars(self):
        return self.arg.free_vars()

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def free_vars(self):
        return self.left.free_vars() | self.right.free_vars()

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: float

    def free_vars(self):
        return self.base.free_vars()

    def __str__(self):
        return f"({self.base} ^ {float(self.exponent)!r})"


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node

    def free_vars(self):
        return self.arg.free_vars()

    def __str__(self):
        return f"{self.func}({self.arg})"


# ---------------------------------------------------------------------------
# simplifying constructors


def _is(node, value):
    return isinstance(node, Const) and node.value == value


def const(value) -> Const:
    return Const(float(value))


def neg(u: Node) -> Node:
    if isinstance(u, Const):
        return Const(-u.value)
    if isinstance(u, Neg):
        return u.arg
    return Neg(u)


def add(u: Node, v: Node) -> Node:
    if isinstance(u, Const) and isinstance(v, Const):
        return Const(u.value + v.value)
    if _is(u, 0.0):
        return v
    if _is(v, 0.0):
        return u
    return BinOp("+", u, v)


def sub(u: Node, v: Node) -> Node:
    if isinstance(u, Const) and isinstance(v, Const):
        return Const(u.value - v.value)
    if _is(v, 0.0):
        return u
    if _is(u, 0.0):
        return neg(v)
    return BinOp("-", u, v)


def mul(u: Node, v: Node) -> Node:
    if isinstance(u, Const) and isinstance(v, Const):
        return Const(u.value * v.value)
    if _is(u, 0.0) or _is(v, 0.0):
        return Const(0.0)
    if _is(u, 1.0):
        return v
    if _is(v, 1.0):
        return u
    if _is(u, -1.0):
        return neg(v)
    if _is(v, -1.0):
        return neg(u)
    return BinOp("*", u, v)


def div(u: Node, v: Node) -> Node:
    if isinstance(u, Const) and isinstance(v, Const) and v.value != 0.0:
        return Const(u.value / v.value)
    if _is(u, 0.0) and not _is(v, 0.0):
        return Const(0.0)
    if _is(v, 1.0):
        return u
    return BinOp("/", u, v)


def power(u: Node, n: float) -> Node:
    n = float(n)
    if n == 0.0:
        return Const(1.0)
    if n == 1.0:
        return u
    if isinstance(u, Const):
        try:
            return Const(math.pow(u.value, n))
        except (ValueError, OverflowError, ZeroDivisionError):
            pass
    return Pow(u, n)


def call(func: str, u: Node) -> Node:
    if isinstance(u, Const):
        return Const(getattr(math, func)(u.value))
    return Call(func, u)


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)


def _tokenize(src: str):
    tokens = []
    pos = 0
    n = len(src)
    while pos < n:
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(src[pos:]) - len(src[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {src[bad]!r}", src, bad)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str, variables: Sequence[str]):
        self.src = src
        self.variables = tuple(variables)
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value:
            found = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", self.src, pos)

    def parse(self) -> Node:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {text!r}", self.src, pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = add(node, rhs) if op == "+" else sub(node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            node = mul(node, rhs) if op == "*" else div(node, rhs)
        return node

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return neg(self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] in ("^", "**"):
            pos = self.take()[2]
            exponent = self.unary()
            if not isinstance(exponent, Const):
                raise ExprSyntaxError("non-constant exponent", self.src, pos)
            return power(base, exponent.value)
        return base

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Const(float(text))
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            if self.peek()[1] == "(":
                if text not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {text!r}", self.src, pos)
                self.take()
                arg = self.expr()
                self.expect(")")
                return call(text, arg)
            if text in self.variables:
                return Var(text)
            if text in CONSTANTS:
                return Const(CONSTANTS[text])
            if text in FUNCTIONS:
                raise ExprSyntaxError(f"function {text!r} needs an argument", self.src, pos)
            raise ExprSyntaxError(f"unknown name {text!r}", self.src, pos)
        found = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {found}", self.src, pos)


# ---------------------------------------------------------------------------
# symbolic derivative


def _derive(node: Node, wrt: str) -> Node:
    if isinstance(node, Const):
        return Const(0.0)
    if isinstance(node, Var):
        return Const(1.0 if node.name == wrt else 0.0)
    if isinstance(node, Neg):
        return neg(_derive(node.arg, wrt))
    if isinstance(node, BinOp):
        u, v = node.left, node.right
        du, dv = _derive(u, wrt), _derive(v, wrt)
        if node.op == "+":
            return add(du, dv)
        if node.op == "-":
            return sub(du, dv)
        if node.op == "*":
            return add(mul(du, v), mul(u, dv))
        # quotient rule; keeps a constant denominator out of the square
        if isinstance(v, Const):
            return div(du, v)
        return div(sub(mul(du, v), mul(u, dv)), power(v, 2.0))
    if isinstance(node, Pow):
        du = _derive(node.base, wrt)
        n = node.exponent
        return mul(mul(Const(n), power(node.base, n - 1.0)), du)
    if isinstance(node, Call):
        u = node.arg
        du = _derive(u, wrt)
        if _is(du, 0.0):
            return Const(0.0)
        outer = {
            "sin": lambda: call("cos", u),
            "cos": lambda: neg(call("sin", u)),
            "sinh": lambda: call("cosh", u),
            "cosh": lambda: call("sinh", u),
            "tanh": lambda: div(Const(1.0), power(call("cosh", u), 2.0)),
            "exp": lambda: call("exp", u),
        }[node.func]()
        return mul(du, outer) if isinstance(du, Const) else mul(outer, du)
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# code generation


def _safe_pow(base, exponent):
    return math.pow(base, exponent)


def to_python(node: Node, prefix: str = "") -> str:
    """Python source for ``node``; math functions are looked up as ``<prefix><name>``."""
    if isinstance(node, Const):
        return repr(float(node.value))
    if isinstance(node, Var):
        return f"_v_{node.name}"
    if isinstance(node, Neg):
        return f"(-{to_python(node.arg, prefix)})"
    if isinstance(node, BinOp):
        return f"({to_python(node.left, prefix)} {node.op} {to_python(node.right, prefix)})"
    if isinstance(node, Pow):
        n = node.exponent
        b = to_python(node.base, prefix)
        if n == int(n) and abs(n) <= 64:
            return f"({b} ** {int(n)})" if n > 0 else f"(1.0 / ({b} ** {int(-n)}))"
        return f"{prefix}pow({b}, {n!r})"
    if isinstance(node, Call):
        return f"{prefix}{node.func}({to_python(node.arg, prefix)})"
    raise TypeError(f"not an expression node: {node!r}")


MATH_NAMESPACE = {name: getattr(math, name) for name in FUNCTIONS}
MATH_NAMESPACE["pow"] = _safe_pow
NUMPY_NAMESPACE = {name: getattr(np, name) for name in FUNCTIONS}
NUMPY_NAMESPACE["pow"] = np.power


def compile_source(body: str, args: Sequence[str], namespace: dict, name="_f"):
    """Compile ``lambda args: body`` against ``namespace``."""
    arglist = ", ".join(f"_v_{a}" for a in args)
    code = f"def {name}({arglist}):\n    return {body}\n"
    scope = dict(namespace)
    exec(compile(code, f"<heatprop:{name}>", "exec"), scope)
    return scope[name]


# ---------------------------------------------------------------------------
# public wrapper


@dataclass(frozen=True)
class CoeffExpr:
    """A parsed closed-form function of one or more named variables.

    Calling the expression evaluates it; scalar arguments go through the
    ``math`` module (raising on division by zero or a non-real power), array
    arguments through numpy.
    """

    node: Node
    variables: tuple = ("t",)

    def __str__(self):
        return str(self.node)

    @property
    def is_constant(self) -> bool:
        return isinstance(self.node, Const)

    @property
    def value(self) -> float:
        if not self.is_constant:
            raise ValueError(f"{self} is not a constant")
        return self.node.value

    @cached_property
    def scalar(self) -> Callable[..., float]:
        return compile_source(to_python(self.node), self.variables, MATH_NAMESPACE)

    @cached_property
    def vector(self) -> Callable[..., np.ndarray]:
        return compile_source(to_python(self.node), self.variables, NUMPY_NAMESPACE)

    def __call__(self, *args):
        if len(args) != len(self.variables):
            raise TypeError(f"expected {len(self.variables)} arguments, got {len(args)}")
        if all(np.ndim(a) == 0 for a in args):
            try:
                return float(self.scalar(*(float(a) for a in args)))
            except (ZeroDivisionError, ValueError, OverflowError) as exc:
                raise CoefficientDomainError(f"cannot evaluate {self}: {exc}", args[0]) from exc
        arrays = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in args))
        with np.errstate(all="ignore"):
            out = self.vector(*arrays)
        out = np.broadcast_to(np.asarray(out, dtype=float), arrays[0].shape).copy()
        if not np.all(np.isfinite(out)):
            bad = np.flatnonzero(~np.isfinite(out))[0]
            raise CoefficientDomainError(
                f"cannot evaluate {self}: non-finite value", float(arrays[0].flat[bad])
            )
        return out


def parse_coeff_expr(src: str, variables: Sequence[str] = ("t",)) -> CoeffExpr:
    """Parse ``src`` into a :class:`CoeffExpr` over ``variables``.

    Raises :class:`ExprSyntaxError` (with the character position) on syntax
    errors, unknown function or variable names and non-constant exponents.
    """
    if not isinstance(src, str) or not src.strip():
        raise ExprSyntaxError("empty expression", src or "", 0)
    variables = tuple(variables)
    clash = set(variables) & (set(FUNCTIONS) | set(CONSTANTS))
    if clash:
        raise ValueError(f"reserved names used as variables: {sorted(clash)}")
    return CoeffExpr(_Parser(src, variables).parse(), variables)


def differentiate(e: CoeffExpr, wrt: str | None = None) -> CoeffExpr:
    """Symbolic derivative of ``e`` with respect to ``wrt`` (default: first variable)."""
    wrt = e.variables[0] if wrt is None else wrt
    return CoeffExpr(_derive(e.node, wrt), e.variables)


def as_expr(value, variables: Sequence[str] = ("t",)) -> CoeffExpr:
    """Coerce a string, number or :class:`CoeffExpr` into a :class:`CoeffExpr`."""
    if isinstance(value, CoeffExpr):
        return value
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return CoeffExpr(Const(float(value)), tuple(variables))
    return parse_coeff_expr(str(value), variables)
