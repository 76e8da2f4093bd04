"""Metric and warping expressions: parsing, printing and jet evaluation.

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' exponent)?  |  '-' factor
    base   := number | ident | ident '(' expr ')' | '(' expr ')'
    exponent := signed_number | '(' signed_number ('/' number)? ')'

A leading minus binds looser than ``^`` so ``-t^2`` means ``-(t^2)``.
Fractional exponents must be parenthesised, ``x^(1/2)``; a bare ``x^1/2``
reads as ``(x^1)/2``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .jets import Jet2

__all__ = [
    "Const", "Var", "Param", "Neg", "BinOp", "Pow", "Call", "Node",
    "Expression", "parse", "eval_jet2", "to_text", "FUNCTIONS",
    "ExpressionError", "ExprSyntaxError", "UnknownIdentifierError",
    "ArityError", "DomainError", "UnboundSymbolError",
]


class ExpressionError(ValueError):
    pass


class ExprSyntaxError(ExpressionError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class UnknownIdentifierError(ExpressionError):
    def __init__(self, name: str, position: int):
        super().__init__(f"unknown identifier {name!r} at offset {position}")
        self.name = name
        self.position = position


class ArityError(ExpressionError):
    pass


class DomainError(ExpressionError):
    def __init__(self, message: str, subexpr: str):
        super().__init__(f"{message} in {subexpr}")
        self.subexpr = subexpr


class UnboundSymbolError(ExpressionError):
    pass


# --- AST ------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: Fraction


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Const, Var, Param, Neg, BinOp, Pow, Call]

FUNCTIONS = ("sin", "cos", "sinh", "cosh", "tanh", "exp", "log", "sqrt")


# --- tokenizer / parser ---------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str, coords: Sequence[str], params: Iterable[str]):
        self.tokens = _tokenize(source)
        self.i = 0
        self.coords = set(coords)
        self.params = set(params)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, value, pos = self.peek()
        if value != text or kind == "end":
            found = "end of input" if kind == "end" else repr(value)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", pos)
        return self.take()

    def parse(self) -> Node:
        node = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {value!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.peek()[1] == "-":
            self.take()
            arg = self.factor()
            if isinstance(arg, Const):
                return Const(-arg.value)
            return Neg(arg)
        node = self.base()
        if self.peek()[1] == "^":
            self.take()
            node = Pow(node, self.exponent())
        return node

    def signed_number(self) -> Fraction:
        sign = 1
        if self.peek()[1] in ("+", "-"):
            sign = -1 if self.take()[1] == "-" else 1
        kind, value, pos = self.peek()
        if kind != "num":
            raise ExprSyntaxError("expected numeric exponent", pos)
        self.take()
        return sign * Fraction(value)

    def exponent(self) -> Fraction:
        if self.peek()[1] == "(":
            self.take()
            q = self.signed_number()
            if self.peek()[1] == "/":
                self.take()
                kind, value, pos = self.peek()
                if kind != "num":
                    raise ExprSyntaxError("expected exponent denominator", pos)
                self.take()
                den = Fraction(value)
                if den == 0:
                    raise ExprSyntaxError("zero exponent denominator", pos)
                q = q / den
            self.expect(")")
            return q
        return self.signed_number()

    def base(self) -> Node:
        kind, value, pos = self.peek()
        if kind == "num":
            self.take()
            return Const(float(value))
        if kind == "ident":
            self.take()
            if self.peek()[1] == "(":
                if value not in FUNCTIONS:
                    raise UnknownIdentifierError(value, pos)
                self.take()
                args = [] if self.peek()[1] == ")" else [self.expr()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != 1:
                    raise ArityError(
                        f"{value}() takes 1 argument, got {len(args)} (offset {pos})")
                return Call(value, args[0])
            if value in FUNCTIONS:
                raise ArityError(f"{value} called without an argument (offset {pos})")
            if value in self.coords:
                return Var(value)
            if value in self.params:
                return Param(value)
            raise UnknownIdentifierError(value, pos)
        if value == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(value)
        raise ExprSyntaxError(f"unexpected {found}", pos)


# --- printing -------------------------------------------------------------

def _fmt_number(x: float) -> str:
    text = repr(float(x))
    return f"(-{text[1:]})" if text.startswith("-") else text


def _fmt_exponent(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator) if q >= 0 else f"({q.numerator})"
    return f"({q.numerator}/{q.denominator})"


def to_text(node: Node) -> str:
    """Fully parenthesised text that parses back to an equal tree."""
    if isinstance(node, Const):
        return _fmt_number(node.value)
    if isinstance(node, (Var, Param)):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.arg)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Pow):
        return f"({to_text(node.base)}^{_fmt_exponent(node.exponent)})"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


# --- Expression -----------------------------------------------------------

def _symbols(node: Node, kind) -> set[str]:
    if isinstance(node, kind):
        return {node.name}
    if isinstance(node, (Neg, Call)):
        return _symbols(node.arg, kind)
    if isinstance(node, Pow):
        return _symbols(node.base, kind)
    if isinstance(node, BinOp):
        return _symbols(node.left, kind) | _symbols(node.right, kind)
    return set()


def _substitute(node: Node, values: Mapping[str, float]) -> Node:
    if isinstance(node, Param):
        return Const(float(values[node.name])) if node.name in values else node
    if isinstance(node, Neg):
        return Neg(_substitute(node.arg, values))
    if isinstance(node, Call):
        return Call(node.func, _substitute(node.arg, values))
    if isinstance(node, Pow):
        return Pow(_substitute(node.base, values), node.exponent)
    if isinstance(node, BinOp):
        return BinOp(node.op, _substitute(node.left, values),
                     _substitute(node.right, values))
    return node


@dataclass(frozen=True)
class Expression:
    """An immutable expression tree over an ordered tuple of coordinates."""

    root: Node
    coords: tuple[str, ...]
    params: tuple[str, ...] = field(default=())

    def __post_init__(self):
        unknown = _symbols(self.root, Var) - set(self.coords)
        if unknown:
            raise ValueError(f"variables {sorted(unknown)} not among coordinates {self.coords}")

    def __str__(self) -> str:
        return to_text(self.root)

    @property
    def free_params(self) -> set[str]:
        return _symbols(self.root, Param)

    def bind(self, **values: float) -> "Expression":
        """Substitute numeric values for named constants."""
        root = _substitute(self.root, values)
        return Expression(root, self.coords,
                          tuple(p for p in self.params if p not in values))

    def on(self, coords: Sequence[str]) -> "Expression":
        """The same expression viewed on a larger coordinate tuple."""
        return Expression(self.root, tuple(coords), self.params)

    def jet(self, point) -> Jet2:
        return eval_jet2(self, point)

    def __call__(self, point) -> np.ndarray:
        return eval_jet2(self, point).value


def parse(source: str, coords: Sequence[str], params: Iterable[str] = ()) -> Expression:
    """Parse ``source`` into an :class:`Expression` over ``coords``.

    ``params`` names symbolic constants that must be bound with
    :meth:`Expression.bind` before evaluation.
    """
    coords = tuple(coords)
    if not coords or len(set(coords)) != len(coords):
        raise ValueError(f"coordinate names must be nonempty and distinct: {coords}")
    params = tuple(params)
    clash = set(params) & set(coords)
    if clash:
        raise ValueError(f"parameter names collide with coordinates: {sorted(clash)}")
    root = _Parser(source, coords, params).parse()
    return Expression(root, coords, params)


# --- jet evaluation -------------------------------------------------------

def _primitive(name: str, x: np.ndarray, where: str):
    if name == "sin":
        s, c = np.sin(x), np.cos(x)
        return s, c, -s
    if name == "cos":
        s, c = np.sin(x), np.cos(x)
        return c, -s, -c
    if name == "sinh":
        s, c = np.sinh(x), np.cosh(x)
        return s, c, s
    if name == "cosh":
        s, c = np.sinh(x), np.cosh(x)
        return c, s, c
    if name == "tanh":
        t = np.tanh(x)
        d = 1.0 - t * t
        return t, d, -2.0 * t * d
    if name == "exp":
        e = np.exp(x)
        return e, e, e
    if name == "log":
        if np.any(x <= 0):
            raise DomainError("log of nonpositive value", where)
        return np.log(x), 1.0 / x, -1.0 / (x * x)
    if name == "sqrt":
        if np.any(x <= 0):
            raise DomainError("sqrt of nonpositive value (derivative undefined)", where)
        s = np.sqrt(x)
        return s, 0.5 / s, -0.25 / (s * x)
    raise ExpressionError(f"unknown function {name!r}")


def _power(x: np.ndarray, q: Fraction, where: str):
    p = float(q)
    if q.denominator != 1 and np.any(x <= 0):
        raise DomainError(f"non-integer power {q} of nonpositive base", where)
    if q < 0 and np.any(x == 0):
        raise DomainError(f"negative power {q} of zero", where)

    def term(coeff: Fraction, e: Fraction):
        if coeff == 0:
            return np.zeros_like(x)
        return float(coeff) * np.power(x, float(e))

    return np.power(x, p), term(q, q - 1), term(q * (q - 1), q - 2)


def _eval(node: Node, env: dict, batch: tuple, dim: int) -> Jet2:
    if isinstance(node, Const):
        return Jet2.constant(node.value, batch, dim)
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Param):
        raise UnboundSymbolError(f"symbol {node.name!r} is not bound")
    if isinstance(node, Neg):
        return -_eval(node.arg, env, batch, dim)
    if isinstance(node, BinOp):
        a = _eval(node.left, env, batch, dim)
        b = _eval(node.right, env, batch, dim)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if np.any(b.value == 0):
            raise DomainError("division by zero", to_text(node))
        v = b.value
        return a * b.compose(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    if isinstance(node, Pow):
        a = _eval(node.base, env, batch, dim)
        return a.compose(*_power(a.value, node.exponent, to_text(node)))
    if isinstance(node, Call):
        a = _eval(node.arg, env, batch, dim)
        return a.compose(*_primitive(node.func, a.value, to_text(node)))
    raise TypeError(f"not an expression node: {node!r}")


def eval_jet2(e: Expression, point) -> Jet2:
    """Value, gradient and Hessian of ``e`` at ``point``.

    ``point`` has shape ``(d,)`` or ``(..., d)`` with ``d = len(e.coords)``;
    leading axes are carried through as a batch.
    """
    point = np.asarray(point, dtype=float)
    dim = len(e.coords)
    if point.shape[-1:] != (dim,):
        raise ValueError(f"point has shape {point.shape}, expected (..., {dim})")
    batch = point.shape[:-1]
    env = {name: Jet2.variable(point[..., i], i, dim) for i, name in enumerate(e.coords)}
    with np.errstate(over="ignore", invalid="ignore"):
        jet = _eval(e.root, env, batch, dim)
    if not (np.all(np.isfinite(jet.value)) and np.all(np.isfinite(jet.grad))
            and np.all(np.isfinite(jet.hess))):
        raise DomainError("non-finite result", str(e))
    return jet


def constant(value: float, coords: Sequence[str]) -> Expression:
    return Expression(Const(float(value)), tuple(coords))


def is_constant_zero(e: Expression) -> bool:
    return isinstance(e.root, Const) and e.root.value == 0.0

