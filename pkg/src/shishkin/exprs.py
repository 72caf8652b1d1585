"""Arithmetic expressions in the single variable x.

Coefficient entries a_ij(x) and forcing terms f_i(x) enter the toolkit as
text, so problem files stay plain data.  The language is deliberately tiny:
real literals, the variable x, the operators + - * / ^, unary minus, and the
functions sin, cos, exp, ln, sqrt, abs.

Grammar (whitespace insignificant)::

    expr   = term { ("+" | "-") term }
    term   = factor { ("*" | "/") factor }
    factor = "-" factor | power
    power  = atom [ "^" factor ]
    atom   = number | "x" | func "(" expr ")" | "(" expr ")"
    func   = "sin" | "cos" | "exp" | "ln" | "sqrt" | "abs"
    number = digits ["." digits] [("e" | "E") ["+" | "-"] digits]

so ^ is right-associative and binds tighter than unary minus: "-x^2" is
-(x^2), and "2^-x" is accepted.  Evaluation is plain IEEE double precision;
points outside a function's real domain raise ExprDomainError instead of
silently producing NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "ExprDomainError",
    "FUNCTION_NAMES",
    "parse",
    "evaluate",
    "evaluate_array",
    "to_source",
]

FUNCTION_NAMES = ("sin", "cos", "exp", "ln", "sqrt", "abs")


class ExprError(ValueError):
    """Base class for expression parsing and evaluation failures."""


class ExprSyntaxError(ExprError):
    """Parse failure, carrying the byte offset and the expected-token set."""

    def __init__(self, offset: int, expected: tuple[str, ...], found: str):
        self.offset = offset
        self.expected = expected
        self.found = found
        super().__init__(
            "syntax error at offset %d: expected %s, found %s"
            % (offset, " or ".join(expected), found)
        )


class UnknownIdentifierError(ExprError):
    """An identifier that is neither x nor a known function name."""

    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__("unknown identifier '%s' at offset %d" % (name, offset))


class ExprDomainError(ExprError):
    """Evaluation left a function's real domain (1/0, ln(-1), ...)."""

    def __init__(self, reason: str, source: str, x: float):
        self.reason = reason
        self.source = source
        self.x = x
        super().__init__("%s in '%s' at x = %r" % (reason, source, x))


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    """The independent variable x."""


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]

_ATOM_EXPECTED = ("number", "'x'", "function name", "'('")


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    """Scan source into (kind, text, offset) triples, ending with ('end', '', len)."""
    tokens = []
    i, limit = 0, len(source)
    while i < limit:
        ch = source[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch in "+-*/^()":
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch.isdigit():
            start = i
            while i < limit and source[i].isdigit():
                i += 1
            if i < limit and source[i] == ".":
                i += 1
                if i >= limit or not source[i].isdigit():
                    raise ExprSyntaxError(i, ("digit after '.'",), _found_at(source, i))
                while i < limit and source[i].isdigit():
                    i += 1
            if i < limit and source[i] in "eE":
                # only an exponent if a (signed) digit follows, else leave the
                # letter for the identifier scanner to reject
                j = i + 1
                if j < limit and source[j] in "+-":
                    j += 1
                if j < limit and source[j].isdigit():
                    i = j
                    while i < limit and source[i].isdigit():
                        i += 1
            tokens.append(("num", source[start:i], start))
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < limit and (source[i].isalnum() or source[i] == "_"):
                i += 1
            tokens.append(("ident", source[start:i], start))
            continue
        raise ExprSyntaxError(i, ("number", "identifier", "operator", "parenthesis"), "'%s'" % ch)
    tokens.append(("end", "", limit))
    return tokens


def _found_at(source: str, offset: int) -> str:
    if offset >= len(source):
        return "end of input"
    return "'%s'" % source[offset]


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        k, text, offset = self.peek()
        if k != kind:
            found = "end of input" if k == "end" else "'%s'" % text
            raise ExprSyntaxError(offset, ("'%s'" % kind,), found)
        return self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        kind, text, offset = self.peek()
        if kind != "end":
            raise ExprSyntaxError(offset, ("operator", "end of input"), "'%s'" % text)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        if self.peek()[0] == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> Expr:
        kind, text, offset = self.peek()
        if kind == "num":
            self.advance()
            return Num(float(text))
        if kind == "ident":
            self.advance()
            if text == "x":
                return Var()
            if text in FUNCTION_NAMES:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise UnknownIdentifierError(text, offset)
        if kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else "'%s'" % text
        raise ExprSyntaxError(offset, _ATOM_EXPECTED, found)


def parse(source: str) -> Expr:
    """Parse source text into an expression tree.

    Raises ExprSyntaxError (with byte offset and expected-token set) on
    malformed input and UnknownIdentifierError for identifiers other than
    x and the built-in function names.
    """
    return _Parser(source).parse()


def _power(base: float, exponent: float, node: Expr, x: float) -> float:
    if base < 0.0 and not (math.isfinite(exponent) and float(exponent).is_integer()):
        raise ExprDomainError("negative base with non-integer exponent", to_source(node), x)
    if base == 0.0 and exponent < 0.0:
        raise ExprDomainError("zero base with negative exponent", to_source(node), x)
    try:
        return math.pow(base, exponent)
    except OverflowError:
        sign = -1.0 if (base < 0.0 and int(exponent) % 2 == 1) else 1.0
        return sign * math.inf


def evaluate(expr: Expr, x: float) -> float:
    """Evaluate expr at the point x in IEEE double precision.

    Pure and deterministic: identical (expr, x) give bit-identical results
    on one platform.  Division by zero, ln/sqrt outside their domain, and
    ^ of a negative base with non-integer exponent raise ExprDomainError
    naming the offending subexpression and the point x.
    """
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        return float(x)
    if isinstance(expr, Neg):
        return -evaluate(expr.operand, x)
    if isinstance(expr, BinOp):
        a = evaluate(expr.left, x)
        b = evaluate(expr.right, x)
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        if expr.op == "/":
            if b == 0.0:
                raise ExprDomainError("division by zero", to_source(expr), x)
            return a / b
        return _power(a, b, expr, x)
    a = evaluate(expr.arg, x)
    name = expr.func
    if name == "sin":
        return math.sin(a) if math.isfinite(a) else math.nan
    if name == "cos":
        return math.cos(a) if math.isfinite(a) else math.nan
    if name == "exp":
        try:
            return math.exp(a)
        except OverflowError:
            return math.inf
    if name == "ln":
        if a <= 0.0:
            raise ExprDomainError("ln of non-positive argument", to_source(expr), x)
        return math.log(a)
    if name == "sqrt":
        if a < 0.0:
            raise ExprDomainError("sqrt of negative argument", to_source(expr), x)
        return math.sqrt(a)
    return abs(a)


def evaluate_array(expr: Expr, xs: np.ndarray) -> np.ndarray:
    """Evaluate expr over a 1-D array of points.

    Same domain rules as evaluate(); the error names the first offending
    point.  Used on hot paths (validation sampling, assembly over a mesh).
    """
    xs = np.asarray(xs, dtype=float)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        return _eval_array(expr, xs)


def _first_bad(xs: np.ndarray, mask: np.ndarray) -> float:
    return float(xs[int(np.argmax(mask))])


def _eval_array(expr: Expr, xs: np.ndarray) -> np.ndarray:
    if isinstance(expr, Num):
        return np.full(xs.shape, expr.value)
    if isinstance(expr, Var):
        return xs.astype(float, copy=True)
    if isinstance(expr, Neg):
        return -_eval_array(expr.operand, xs)
    if isinstance(expr, BinOp):
        a = _eval_array(expr.left, xs)
        b = _eval_array(expr.right, xs)
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        if expr.op == "/":
            zero = b == 0.0
            if zero.any():
                raise ExprDomainError("division by zero", to_source(expr), _first_bad(xs, zero))
            return a / b
        frac_exp = b != np.floor(b)
        bad = (a < 0.0) & (frac_exp | ~np.isfinite(b))
        if bad.any():
            raise ExprDomainError(
                "negative base with non-integer exponent", to_source(expr), _first_bad(xs, bad)
            )
        bad = (a == 0.0) & (b < 0.0)
        if bad.any():
            raise ExprDomainError(
                "zero base with negative exponent", to_source(expr), _first_bad(xs, bad)
            )
        return np.power(a, b)
    a = _eval_array(expr.arg, xs)
    name = expr.func
    if name == "sin":
        return np.sin(a)
    if name == "cos":
        return np.cos(a)
    if name == "exp":
        return np.exp(a)
    if name == "ln":
        bad = a <= 0.0
        if bad.any():
            raise ExprDomainError("ln of non-positive argument", to_source(expr), _first_bad(xs, bad))
        return np.log(a)
    if name == "sqrt":
        bad = a < 0.0
        if bad.any():
            raise ExprDomainError("sqrt of negative argument", to_source(expr), _first_bad(xs, bad))
        return np.sqrt(a)
    return np.abs(a)


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _PRECEDENCE[node.op]
    if isinstance(node, Neg):
        return 3
    return 5


def to_source(expr: Expr) -> str:
    """Render an expression tree as parseable text.

    Canonical in the sense that parse(to_source(e)) reproduces e node for
    node (for any tree the parser can produce; literals are nonnegative by
    construction, negation being a separate node).
    """
    if isinstance(expr, Num):
        return repr(expr.value)
    if isinstance(expr, Var):
        return "x"
    if isinstance(expr, Neg):
        inner = to_source(expr.operand)
        if _prec(expr.operand) < 3:
            inner = "(%s)" % inner
        return "-%s" % inner
    if isinstance(expr, Call):
        return "%s(%s)" % (expr.func, to_source(expr.arg))
    p = _PRECEDENCE[expr.op]
    left = to_source(expr.left)
    right = to_source(expr.right)
    if expr.op == "^":
        if _prec(expr.left) <= p:
            left = "(%s)" % left
        if _prec(expr.right) < p:
            right = "(%s)" % right
        return "%s^%s" % (left, right)
    if _prec(expr.left) < p:
        left = "(%s)" % left
    if _prec(expr.right) <= p:
        right = "(%s)" % right
    return "%s %s %s" % (left, expr.op, right)
