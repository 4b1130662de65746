"""Small expression language in one index variable ``j``.

Grammar (right-associative ``^``)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' factor)?
    base   := number | 'j' | func '(' expr ')' | '(' expr ')' | '-' base
    func   := 'exp' | 'log' | 'pow2'

Expressions are used to generate ball sequences such as centres
``0.75*pow2(4^j)`` and radii ``pow2(-(8^j))``.  Besides plain evaluation they
support evaluation of the natural logarithm without forming the value
(``eval_log``), which keeps doubly-exponential families usable far beyond the
binary64 range, and a crude limit calculus (``limit``) for ``j -> infinity``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Union

__all__ = [
    "Expr", "Num", "Var", "Neg", "BinOp", "Call",
    "ExpressionEvalError", "ExpressionParseError",
    "parse_expr", "to_text", "evaluate", "eval_log", "limit",
]

LN2 = math.log(2.0)
FUNCS = ("exp", "log", "pow2")


class ExpressionEvalError(ArithmeticError):
    """Raised when an expression cannot be evaluated at a given index."""


class ExpressionParseError(ValueError):
    def __init__(self, message: str, pos: int, expected: tuple[str, ...] = ()):
        self.pos = pos
        self.expected = expected
        detail = f" (expected one of: {', '.join(expected)})" if expected else ""
        super().__init__(f"{message} at offset {pos}{detail}")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str = "j"


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str  # one of FUNCS
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}",
                                       pos + len(text[pos:]) - len(text[pos:].lstrip()))
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            raise ExpressionParseError(f"unexpected {val or 'end of input'!r}", pos, (repr(op),))

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        node = self.base()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            node = BinOp("^", node, self.factor())
        return node

    def base(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val == "j":
                return Var("j")
            if val in FUNCS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(val, arg)
            raise ExpressionParseError(f"unknown name {val!r}", pos, ("j",) + FUNCS)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "op" and val == "-":
            if self.peek()[0] == "num":
                # a signed literal, so negative numbers print and parse back unchanged
                return Num(-float(self.take()[1]))
            return Neg(self.base())
        raise ExpressionParseError(f"unexpected {val or 'end of input'!r}", pos,
                                   ("number", "j", "exp", "log", "pow2", "'('", "'-'"))


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    node = p.expr()
    kind, val, pos = p.peek()
    if kind != "end":
        raise ExpressionParseError(f"trailing input {val!r}", pos, ("operator", "end of input"))
    return node


def _fmt_num(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def to_text(e: Expr) -> str:
    """Fully parenthesised text that parses back to an equal tree."""
    if isinstance(e, Num):
        s = _fmt_num(e.value)
        return f"({s})" if e.value < 0 else s
    if isinstance(e, Var):
        return "j"
    if isinstance(e, Neg):
        return f"-({to_text(e.arg)})"
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg)})"
    return f"({to_text(e.left)}{e.op}{to_text(e.right)})"


# ------------------------------------------------------------- evaluation

def evaluate(e: Expr, j: float) -> float:
    try:
        v = _eval(e, j)
    except (OverflowError, ZeroDivisionError, ValueError) as exc:
        raise ExpressionEvalError(f"{to_text(e)} at j={j}: {exc}") from exc
    if math.isnan(v) or math.isinf(v):
        raise ExpressionEvalError(f"{to_text(e)} at j={j}: non-finite result")
    return v


def _eval(e: Expr, j: float) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return float(j)
    if isinstance(e, Neg):
        return -_eval(e.arg, j)
    if isinstance(e, Call):
        a = _eval(e.arg, j)
        if e.func == "exp":
            return math.exp(a)
        if e.func == "pow2":
            return math.pow(2.0, a)
        if a <= 0:
            raise ValueError("log of non-positive value")
        return math.log(a)
    a = _eval(e.left, j)
    b = _eval(e.right, j)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        return a / b
    r = math.pow(a, b)
    if isinstance(r, complex):  # pragma: no cover - math.pow raises instead
        raise ValueError("complex power")
    return r


def eval_log(e: Expr, j: float) -> float:
    """Natural log of a positive-valued expression, evaluated in log domain.

    ``eval_log(pow2(-(8^j)), 5)`` returns ``-32768*ln 2`` even though the value
    underflows.  Sums use log-sum-exp, differences of positive terms use
    ``log1p``; other constructs fall back to plain evaluation.
    """
    try:
        return _eval_log(e, j)
    except (OverflowError, ZeroDivisionError, ValueError) as exc:
        raise ExpressionEvalError(f"log of {to_text(e)} at j={j}: {exc}") from exc


def _eval_log(e: Expr, j: float) -> float:
    if isinstance(e, Call):
        if e.func == "pow2":
            return _eval(e.arg, j) * LN2
        if e.func == "exp":
            return _eval(e.arg, j)
    if isinstance(e, BinOp):
        if e.op == "*":
            return _eval_log(e.left, j) + _eval_log(e.right, j)
        if e.op == "/":
            return _eval_log(e.left, j) - _eval_log(e.right, j)
        if e.op == "^":
            return _eval(e.right, j) * _eval_log(e.left, j)
        if e.op == "+":
            la, lb = _eval_log(e.left, j), _eval_log(e.right, j)
            hi, lo = max(la, lb), min(la, lb)
            return hi + math.log1p(math.exp(lo - hi))
        if e.op == "-" and _positive(e.left) and _positive(e.right):
            la, lb = _eval_log(e.left, j), _eval_log(e.right, j)
            if lb >= la:
                raise ValueError("log of non-positive difference")
            return la + math.log1p(-math.exp(lb - la))
    v = _eval(e, j)
    if v <= 0:
        raise ValueError("log of non-positive value")
    return math.log(v)


# ---------------------------------------------------------- limit calculus

def _positive(e: Expr) -> bool:
    if isinstance(e, Num):
        return e.value > 0
    if isinstance(e, Call):
        return e.func in ("exp", "pow2")
    if isinstance(e, BinOp) and e.op in "*/+":
        return _positive(e.left) and _positive(e.right)
    if isinstance(e, BinOp) and e.op == "^":
        return _positive(e.left)
    return False


def limit(e: Expr) -> Optional[float]:
    """Limit of ``e`` as ``j -> +inf`` (``+-inf`` allowed) or None if undecided."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return math.inf
    if isinstance(e, Neg):
        a = limit(e.arg)
        return None if a is None else -a
    if isinstance(e, Call):
        a = limit(e.arg)
        if a is None:
            return None
        if e.func == "exp":
            return 0.0 if a == -math.inf else math.exp(a) if a < 700 else math.inf
        if e.func == "pow2":
            return 0.0 if a == -math.inf else 2.0 ** a if a < 1000 else math.inf
        if a == math.inf:
            return math.inf
        if a == 0.0 and _positive(e.arg):
            return -math.inf
        return math.log(a) if a > 0 else None
    a, b = limit(e.left), limit(e.right)
    if a is None or b is None:
        return None
    if e.op in "+-":
        if e.op == "-":
            b = -b
        if math.isinf(a) and math.isinf(b) and a != b:
            return None
        return a + b
    if e.op == "*":
        if (math.isinf(a) and b == 0) or (math.isinf(b) and a == 0):
            return None
        return a * b
    if e.op == "/":
        if math.isinf(b):
            return None if math.isinf(a) else 0.0
        if b == 0:
            return None
        return a / b
    # power
    if a > 0 and math.isfinite(a) and math.isfinite(b):
        try:
            return a ** b
        except OverflowError:
            return math.inf
    if math.isinf(b) and math.isfinite(a) and a > 0:
        if a == 1:
            return None
        grows = (a > 1) == (b > 0)
        return math.inf if grows else 0.0
    if a == math.inf:
        if b > 0:
            return math.inf
        if b < 0:
            return 0.0
    return None
