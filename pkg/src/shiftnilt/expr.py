"""A small expression language for Laplace-domain functions of s.

Grammar (whitespace ignored):

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-') unary | power
    power   := primary ('^' unary)?          right associative
    primary := number | 's' | 'pi' | func '(' expr ')' | '(' expr ')'
    func    := exp | sqrt | sin | cos | log | erfc | erfcx | e1

Exponents must be constant. There is no imaginary literal; transforms of
real functions only need real constants.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import kernels
from .framework import TransformQuery

FUNCTIONS = ("exp", "sqrt", "sin", "cos", "log", "erfc", "erfcx", "e1")
DIVISION_FLOOR = 1e-300
MAX_DEPTH = 100
_MAX_INT_POWER = 64


class ExpressionSyntaxError(ValueError):
    def __init__(self, message, offset, expected=()):
        self.message = message
        self.offset = offset
        self.expected = tuple(expected)
        text = f"{message} at offset {offset}"
        if self.expected:
            text += f"; expected one of: {', '.join(self.expected)}"
        super().__init__(text)


class ExpressionEvaluationError(ArithmeticError):
    def __init__(self, message, span_text):
        self.span_text = span_text
        super().__init__(f"{message} in `{span_text}`")


# -- syntax tree --------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float
    span: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    span: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Node"
    span: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"
    span: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"
    span: tuple = field(default=(0, 0), compare=False, repr=False)


Node = Union[Num, Var, Unary, Binary, Call]


@dataclass(frozen=True)
class Expression:
    """A parsed expression together with its source text."""

    root: Node
    text: str

    def __call__(self, s):
        return evaluate(self, s)

    def span_text(self, node):
        a, b = node.span
        return self.text[a:b]


# -- tokenizer ----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # num, name, op, end
    text: str
    start: int
    end: int


def _tokenize(text):
    toks = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            rest = text[pos:]
            stripped = rest.lstrip()
            if not stripped:
                toks.append(_Tok("end", "", len(text), len(text)))
                return toks
            off = pos + len(rest) - len(stripped)
            raise ExpressionSyntaxError(f"unexpected character {stripped[0]!r}", off)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind), m.end(kind)))
        pos = m.end()


_PRIMARY_START = ("number", "'s'", "'pi'", "function", "'('")
_UNARY_START = ("'+'", "'-'") + _PRIMARY_START


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.depth = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def _advance(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def _fail(self, expected, message=None):
        t = self.tok
        if message is None:
            message = "unexpected end of input" if t.kind == "end" else f"unexpected token {t.text!r}"
        raise ExpressionSyntaxError(message, t.start, expected)

    def _is_op(self, *ops):
        return self.tok.kind == "op" and self.tok.text in ops

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            self._fail(("operator", "end of input"))
        return node

    def expr(self):
        node = self.term()
        while self._is_op("+", "-"):
            op = self._advance().text
            right = self.term()
            node = Binary(op, node, right, (node.span[0], right.span[1]))
        return node

    def term(self):
        node = self.unary()
        while self._is_op("*", "/"):
            op = self._advance().text
            right = self.unary()
            node = Binary(op, node, right, (node.span[0], right.span[1]))
        return node

    def unary(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ExpressionSyntaxError("expression nested too deeply", self.tok.start)
        try:
            if self._is_op("+", "-"):
                t = self._advance()
                operand = self.unary()
                return Unary(t.text, operand, (t.start, operand.span[1]))
            return self.power()
        finally:
            self.depth -= 1

    def power(self):
        base = self.primary()
        if self._is_op("^"):
            self._advance()
            start = self.tok.start
            exponent = self.unary()
            if _has_variable(exponent):
                raise ExpressionSyntaxError("exponent must be a constant expression", start)
            return Binary("^", base, exponent, (base.span[0], exponent.span[1]))
        return base

    def primary(self):
        t = self.tok
        if t.kind == "num":
            self._advance()
            value = float(t.text)
            if not math.isfinite(value):
                raise ExpressionSyntaxError(f"number {t.text!r} out of range", t.start)
            return Num(value, (t.start, t.end))
        if t.kind == "name":
            if t.text == "s":
                self._advance()
                return Var((t.start, t.end))
            if t.text == "pi":
                self._advance()
                return Num(math.pi, (t.start, t.end))
            nxt = self.toks[self.i + 1]
            if nxt.kind == "op" and nxt.text == "(":
                if t.text not in FUNCTIONS:
                    raise ExpressionSyntaxError(f"unknown function {t.text!r}", t.start, FUNCTIONS)
                self._advance()
                self._advance()
                arg = self.expr()
                if self._is_op(","):
                    raise ExpressionSyntaxError(f"function {t.text!r} takes exactly one argument", self.tok.start)
                if not self._is_op(")"):
                    self._fail(("')'", "operator"))
                close = self._advance()
                return Call(t.text, arg, (t.start, close.end))
            if t.text in FUNCTIONS:
                raise ExpressionSyntaxError(f"function {t.text!r} needs an argument", nxt.start, ("'('",))
            raise ExpressionSyntaxError(f"unknown name {t.text!r}", t.start, _PRIMARY_START)
        if t.kind == "op" and t.text == "(":
            self._advance()
            inner = self.expr()
            if not self._is_op(")"):
                self._fail(("')'", "operator"))
            close = self._advance()
            return _respan(inner, (t.start, close.end))
        self._fail(_UNARY_START)


def _respan(node, span):
    kw = {f: getattr(node, f) for f in node.__dataclass_fields__ if f != "span"}
    return type(node)(**kw, span=span)


def _has_variable(node):
    if isinstance(node, Var):
        return True
    if isinstance(node, Num):
        return False
    if isinstance(node, Unary):
        return _has_variable(node.operand)
    if isinstance(node, Binary):
        return _has_variable(node.left) or _has_variable(node.right)
    return _has_variable(node.arg)


def parse(text: str) -> Expression:
    """Parse an expression; raises ExpressionSyntaxError with an offset."""
    if not isinstance(text, str):
        raise TypeError("expression must be a string")
    return Expression(_Parser(text).parse(), text)


# -- printing -----------------------------------------------------------------


def to_text(node) -> str:
    """Fully parenthesised text that parses back to the same tree."""
    if isinstance(node, Expression):
        node = node.root
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return "s"
    if isinstance(node, Unary):
        return f"({node.op}{to_text(node.operand)})"
    if isinstance(node, Binary):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    return f"{node.name}({to_text(node.arg)})"


# -- evaluation ---------------------------------------------------------------


def _is_mp(s):
    mod = type(s).__module__
    return mod.startswith("mpmath")


def _np_erfc(z):
    return kernels.erfcx_array(z) * np.exp(-z * z)


def _np_e1(z):
    return kernels.e1_array(z)


_NP_FUNCS = {
    "exp": np.exp,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
    "log": np.log,
    "erfc": _np_erfc,
    "erfcx": kernels.erfcx_array,
    "e1": _np_e1,
}


def _mp_funcs():
    import mpmath as mp

    return {
        "exp": mp.exp,
        "sqrt": mp.sqrt,
        "sin": mp.sin,
        "cos": mp.cos,
        "log": mp.log,
        "erfc": mp.erfc,
        "erfcx": lambda z: mp.exp(z * z) * mp.erfc(z),
        "e1": mp.e1,
    }


def _int_power(base, k, one):
    result = one
    b = base
    e = abs(k)
    while e:
        if e & 1:
            result = result * b
        b = b * b
        e >>= 1
    return one / result if k < 0 else result


class _Evaluator:
    def __init__(self, expression, mp_mode):
        self.expr = expression
        self.mp = mp_mode
        self.funcs = _mp_funcs() if mp_mode else _NP_FUNCS

    def fail(self, message, node):
        raise ExpressionEvaluationError(message, self.expr.span_text(node))

    def small(self, den):
        if self.mp:
            return abs(den) < DIVISION_FLOOR
        return bool(np.any(np.abs(den) < DIVISION_FLOOR))

    def run(self, node, s):
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Var):
            return s
        if isinstance(node, Unary):
            v = self.run(node.operand, s)
            return -v if node.op == "-" else +v
        if isinstance(node, Call):
            arg = self.run(node.arg, s)
            if not self.mp:
                arg = np.asarray(arg, dtype=complex)
            try:
                return self.funcs[node.name](arg)
            except (ValueError, ZeroDivisionError) as exc:
                self.fail(str(exc), node)
        left = self.run(node.left, s)
        right = self.run(node.right, s)
        op = node.op
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "/":
            if self.small(right):
                self.fail("division by a value below 1e-300 in magnitude", node)
            return left / right
        return self.power(left, right, node)

    def power(self, base, exponent, node):
        e = complex(exponent)
        if not (math.isfinite(e.real) and math.isfinite(e.imag)):
            self.fail("exponent is not finite", node)
        if e.imag == 0 and e.real == round(e.real) and abs(e.real) <= _MAX_INT_POWER:
            k = int(round(e.real))
            if k < 0 and self.small(base):
                self.fail("negative power of a value below 1e-300 in magnitude", node)
            one = 1 if self.mp else np.ones_like(np.asarray(base, dtype=complex))
            return _int_power(base, k, one)
        if self.mp:
            import mpmath as mp

            return mp.power(base, exponent)
        base = np.asarray(base, dtype=complex)
        if np.any(base == 0):
            self.fail("non-integer power of zero", node)
        return np.exp(e * np.log(base))


def evaluate(expression, s):
    """Evaluate at a complex scalar, complex ndarray, or mpmath number."""
    if not isinstance(expression, Expression):
        raise TypeError("evaluate expects a parsed Expression")
    if _is_mp(s):
        return _Evaluator(expression, True).run(expression.root, s)
    arr = np.asarray(s, dtype=complex)
    with np.errstate(all="ignore"):
        out = _Evaluator(expression, False).run(expression.root, arr)
    out = np.broadcast_to(np.asarray(out, dtype=complex), arr.shape)
    if arr.ndim == 0:
        return complex(out)
    return np.array(out)


def expression_query(text, abscissa, bounded=False) -> TransformQuery:
    """TransformQuery for a user expression; the abscissa must be supplied."""
    if abscissa is None:
        raise ValueError("an expression needs an explicit abscissa of convergence")
    ex = parse(text)
    return TransformQuery(
        transform=ex,
        abscissa=float(abscissa),
        is_bounded_hint=bounded,
        oracle=None,
        mp_transform=ex,
        name=text,
    )
