"""Closed-form scalar expressions in (x, y, z, t) with exact derivatives.

Expressions are immutable trees built either by :func:`parse` or by ordinary
Python arithmetic on nodes (``x * sin(t) + 1``).  Every constructor folds
numeric constants and the trivial identities ``a + 0``, ``a * 1``, ``a * 0``,
``a ^ 1``; nothing else is simplified.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?          # exponent must fold to an integer
    atom   := number | 'pi' | var | func '(' expr ')' | '(' expr ')'

with ``var`` one of x, y, z, t and ``func`` one of sin, cos, exp, ln, tanh,
sqrt.  ``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``.

Evaluation compiles each tree once into straight-line numpy code, so the
same expression can be evaluated cheaply on grids many times.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (ArityError, DomainError, ExpressionSyntaxError,
                     UnknownIdentifierError)

VARIABLES = ("x", "y", "z", "t")
SPACE = ("x", "y", "z")
FUNCTIONS = ("sin", "cos", "exp", "ln", "tanh", "sqrt")

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


class Expression:
    """Base class for expression nodes."""

    __slots__ = ()

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self

    def __pow__(self, n):
        if isinstance(n, Num):
            n = n.value
        if not float(n).is_integer():
            raise ValueError(f"only integer powers are supported, got {n!r}")
        return power(self, int(n))

    # -- queries ------------------------------------------------------------
    @cached_property
    def free_vars(self) -> frozenset:
        return frozenset().union(*(c.free_vars for c in self.children()))

    def children(self):
        return ()

    def is_number(self, value=None) -> bool:
        return False

    def depends_on(self, *names) -> bool:
        return bool(self.free_vars.intersection(names))

    def diff(self, var: str) -> Expression:
        return differentiate(self, var)

    @cached_property
    def _compiled(self):
        return _compile(self)

    def __call__(self, x=0.0, y=0.0, z=0.0, t=0.0):
        """Evaluate at a point or, with array arguments, on a grid.

        The result always has the broadcast shape of the arguments, even for
        constant expressions.
        """
        val = self._compiled(x, y, z, t)
        shape = np.broadcast(x, y, z, t).shape
        if shape == ():
            return float(val)
        return np.broadcast_to(np.asarray(val, dtype=float), shape).copy()

    def __str__(self):
        return _to_str(self)

    def _prec(self) -> int:
        return _PREC_ATOM


@dataclass(frozen=True, eq=True, repr=True)
class Num(Expression):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))

    def is_number(self, value=None):
        return value is None or self.value == value

    def _prec(self):
        return _PREC_NEG if self.value < 0 or str(self.value).startswith("-") else _PREC_ATOM


@dataclass(frozen=True, eq=True, repr=True)
class Var(Expression):
    name: str

    @cached_property
    def free_vars(self):
        return frozenset((self.name,))


@dataclass(frozen=True, eq=True, repr=True)
class Neg(Expression):
    arg: Expression

    def children(self):
        return (self.arg,)

    def _prec(self):
        return _PREC_NEG


@dataclass(frozen=True, eq=True, repr=True)
class BinOp(Expression):
    left: Expression
    right: Expression

    def children(self):
        return (self.left, self.right)


class Add(BinOp):
    symbol = "+"

    def _prec(self):
        return _PREC_ADD


class Sub(BinOp):
    symbol = "-"

    def _prec(self):
        return _PREC_ADD


class Mul(BinOp):
    symbol = "*"

    def _prec(self):
        return _PREC_MUL


class Div(BinOp):
    symbol = "/"

    def _prec(self):
        return _PREC_MUL


@dataclass(frozen=True, eq=True, repr=True)
class Pow(Expression):
    base: Expression
    exponent: int

    def children(self):
        return (self.base,)

    def _prec(self):
        return _PREC_POW


@dataclass(frozen=True, eq=True, repr=True)
class Func(Expression):
    name: str
    arg: Expression

    def children(self):
        return (self.arg,)


ZERO = Num(0.0)
ONE = Num(1.0)
x, y, z, t = (Var(n) for n in VARIABLES)

_FOLD = {
    "sin": math.sin, "cos": math.cos, "exp": math.exp, "tanh": math.tanh,
    "ln": lambda v: math.log(v) if v > 0 else None,
    "sqrt": lambda v: math.sqrt(v) if v >= 0 else None,
}


def as_expr(value) -> Expression:
    """Coerce a number, string or Expression to an Expression."""
    if isinstance(value, Expression):
        return value
    if isinstance(value, str):
        return parse(value)
    if isinstance(value, (int, float, np.floating, np.integer)):
        return Num(float(value))
    raise TypeError(f"cannot convert {type(value).__name__} to an expression")


# -- folding constructors ---------------------------------------------------

def add(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if a.is_number(0.0):
        return b
    if b.is_number(0.0):
        return a
    return Add(a, b)


def sub(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if b.is_number(0.0):
        return a
    if a.is_number(0.0):
        return neg(b)
    return Sub(a, b)


def mul(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if a.is_number(0.0) or b.is_number(0.0):
        return ZERO
    if a.is_number(1.0):
        return b
    if b.is_number(1.0):
        return a
    if a.is_number(-1.0):
        return neg(b)
    if b.is_number(-1.0):
        return neg(a)
    return Mul(a, b)


def div(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        return Num(a.value / b.value)
    if b.is_number(1.0):
        return a
    if a.is_number(0.0) and not b.is_number(0.0):
        return ZERO
    return Div(a, b)


def neg(a: Expression) -> Expression:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(base: Expression, n: int) -> Expression:
    n = int(n)
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Num) and not (base.value == 0.0 and n < 0):
        return Num(base.value ** n)
    return Pow(base, n)


def func(name: str, arg: Expression) -> Expression:
    if name not in FUNCTIONS:
        raise UnknownIdentifierError(f"unknown function {name!r}")
    if isinstance(arg, Num):
        folded = _FOLD[name](arg.value)
        if folded is not None:
            return Num(folded)
    return Func(name, arg)


def sin(a):
    return func("sin", as_expr(a))


def cos(a):
    return func("cos", as_expr(a))


def exp(a):
    return func("exp", as_expr(a))


def ln(a):
    return func("ln", as_expr(a))


def tanh(a):
    return func("tanh", as_expr(a))


def sqrt(a):
    return func("sqrt", as_expr(a))


# -- printing ---------------------------------------------------------------

def _num_str(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v)) if v != 0 or math.copysign(1, v) > 0 else "0"
    return repr(v)


def _to_str(e: Expression) -> str:
    if isinstance(e, Num):
        return _num_str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({_to_str(e.arg)})"
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, _PREC_NEG, strict=False)
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _PREC_POW, strict=True)}^{e.exponent}"
    if isinstance(e, BinOp):
        p = e._prec()
        left = _wrap(e.left, p, strict=False)
        right = _wrap(e.right, p, strict=True)
        if p == _PREC_ADD:
            return f"{left} {e.symbol} {right}"
        return f"{left}{e.symbol}{right}"
    raise TypeError(type(e))


def _wrap(e: Expression, prec: int, strict: bool) -> str:
    # strict: equal precedence also needs parentheses (right operands, pow base)
    p = e._prec()
    if p < prec or (strict and p == prec):
        return f"({_to_str(e)})"
    return _to_str(e)


# -- parsing ----------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)


def _tokenize(text):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.advance()
        if val != value:
            found = "end of input" if kind == "end" else repr(val)
            raise ExpressionSyntaxError(f"expected {value!r}, found {found}", pos, self.text)

    def parse(self):
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {val!r}", pos, self.text)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            rhs = self.unary()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.advance()
            return neg(self.unary())
        if tok[0] == "op" and tok[1] == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            pos = self.advance()[2]
            exponent = self.unary()
            if not isinstance(exponent, Num) or not exponent.value.is_integer():
                raise ExpressionSyntaxError("exponent must be an integer constant", pos, self.text)
            if isinstance(base, Num) and base.value == 0.0 and exponent.value < 0:
                raise DomainError(f"0 raised to negative power in {self.text!r}")
            return power(base, int(exponent.value))
        return base

    def atom(self):
        kind, val, pos = self.advance()
        if kind == "num":
            return Num(float(val))
        if kind == "ident":
            if val in VARIABLES:
                return Var(val)
            if val == "pi":
                return Num(math.pi)
            if val in FUNCTIONS:
                if self.peek()[1] != "(":
                    raise ExpressionSyntaxError(f"function {val!r} needs an argument", self.peek()[2], self.text)
                self.advance()
                if self.peek()[1] == ")":
                    raise ArityError(f"{val} takes exactly one argument, got 0", self.peek()[2], self.text)
                arg = self.expr()
                if self.peek()[1] == ",":
                    raise ArityError(f"{val} takes exactly one argument", self.peek()[2], self.text)
                self.expect(")")
                return func(val, arg)
            raise UnknownIdentifierError(f"unknown identifier {val!r}", pos, self.text)
        if val == "(":
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if kind == "end" else repr(val)
        raise ExpressionSyntaxError(f"unexpected {found}", pos, self.text)


def parse(text: str) -> Expression:
    """Parse an expression string; raises ExpressionSyntaxError on bad input."""
    if not isinstance(text, str):
        raise TypeError("expression text must be a string")
    return _Parser(text).parse()


# -- differentiation --------------------------------------------------------

def differentiate(e: Expression, var: str) -> Expression:
    """Exact symbolic derivative of ``e`` with respect to ``var``."""
    if var not in VARIABLES:
        raise ValueError(f"cannot differentiate with respect to {var!r}")
    cache = {}

    def d(node):
        key = id(node)
        if key in cache:
            return cache[key][1]
        out = _d(node)
        cache[key] = (node, out)  # keep node alive so ids stay unique
        return out

    def _d(node):
        if var not in node.free_vars:
            return ZERO
        if isinstance(node, Var):
            return ONE
        if isinstance(node, Neg):
            return neg(d(node.arg))
        if isinstance(node, Add):
            return add(d(node.left), d(node.right))
        if isinstance(node, Sub):
            return sub(d(node.left), d(node.right))
        if isinstance(node, Mul):
            return add(mul(d(node.left), node.right), mul(node.left, d(node.right)))
        if isinstance(node, Div):
            num = sub(mul(d(node.left), node.right), mul(node.left, d(node.right)))
            return div(num, power(node.right, 2))
        if isinstance(node, Pow):
            n = node.exponent
            return mul(mul(Num(n), power(node.base, n - 1)), d(node.base))
        if isinstance(node, Func):
            u, du = node.arg, d(node.arg)
            if node.name == "sin":
                outer = func("cos", u)
            elif node.name == "cos":
                outer = neg(func("sin", u))
            elif node.name == "exp":
                outer = node
            elif node.name == "ln":
                return div(du, u)
            elif node.name == "tanh":
                outer = sub(ONE, power(node, 2))
            elif node.name == "sqrt":
                return div(du, mul(Num(2.0), node))
            return mul(outer, du)
        raise TypeError(type(node))

    return d(e)


# -- compilation to numpy ---------------------------------------------------

def _ln(v):
    if np.any(np.asarray(v) <= 0):
        raise DomainError("ln of a non-positive argument")
    return np.log(v)


def _sqrt(v):
    if np.any(np.asarray(v) < 0):
        raise DomainError("sqrt of a negative argument")
    return np.sqrt(v)


def _div(a, b):
    if np.any(np.asarray(b) == 0):
        raise DomainError("division by zero")
    return np.divide(a, b)


def _ipow(b, n):
    if n < 0:
        return _div(1.0, np.power(b, -n))
    return np.power(b, n)


_NAMESPACE = {
    "sin": np.sin, "cos": np.cos, "exp": np.exp, "tanh": np.tanh,
    "ln": _ln, "sqrt": _sqrt, "_div": _div, "_ipow": _ipow, "inf": math.inf,
}


def _compile(e: Expression):
    lines = []
    names = {}

    def emit(node):
        key = id(node)
        if key in names:
            return names[key][1]
        if isinstance(node, Num):
            ref = repr(node.value)
        elif isinstance(node, Var):
            ref = node.name
        else:
            args = [emit(c) for c in node.children()]
            if isinstance(node, Neg):
                rhs = f"-{args[0]}"
            elif isinstance(node, Div):
                rhs = f"_div({args[0]}, {args[1]})"
            elif isinstance(node, BinOp):
                rhs = f"{args[0]} {node.symbol} {args[1]}"
            elif isinstance(node, Pow):
                rhs = f"_ipow({args[0]}, {node.exponent})"
            else:
                rhs = f"{node.name}({args[0]})"
            ref = f"_v{len(lines)}"
            lines.append(f"    {ref} = {rhs}")
        names[key] = (node, ref)
        return ref

    result = emit(e)
    src = "def _f(x, y, z, t):\n" + "\n".join(lines + [f"    return {result}"]) + "\n"
    ns = dict(_NAMESPACE)
    with np.errstate(all="ignore"):
        exec(compile(src, "<expression>", "exec"), ns)
    f = ns["_f"]

    def evaluate(x, y, z, t):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                return f(x, y, z, t)
        except DomainError as err:
            raise DomainError(f"{err} while evaluating {_short(e)}") from None

    return evaluate


def _short(e, limit=120):
    s = str(e)
    return s if len(s) <= limit else s[:limit] + "..."


# -- vector calculus --------------------------------------------------------

def coords(dim: int):
    if dim not in (1, 2, 3):
        raise ValueError("dimension must be 1, 2 or 3")
    return SPACE[:dim]


def gradient(e: Expression, dim: int) -> tuple:
    return tuple(differentiate(e, v) for v in coords(dim))


def laplacian(e: Expression, dim: int) -> Expression:
    out = ZERO
    for v in coords(dim):
        out = add(out, differentiate(differentiate(e, v), v))
    return out


def divergence(vec) -> Expression:
    out = ZERO
    for comp, v in zip(vec, coords(len(vec))):
        out = add(out, differentiate(comp, v))
    return out


def curl(vec) -> tuple:
    """Curl of a 2- or 3-component field; a 2D field yields its z component only."""
    if len(vec) == 3:
        ax, ay, az = vec
        return (sub(differentiate(az, "y"), differentiate(ay, "z")),
                sub(differentiate(ax, "z"), differentiate(az, "x")),
                sub(differentiate(ay, "x"), differentiate(ax, "y")))
    if len(vec) == 2:
        ax, ay = vec
        return (sub(differentiate(ay, "x"), differentiate(ax, "y")),)
    raise ValueError("curl needs a 2- or 3-component field")


def dot(u, v) -> Expression:
    if len(u) != len(v):
        raise ValueError("vector dimension mismatch")
    out = ZERO
    for a, b in zip(u, v):
        out = add(out, mul(a, b))
    return out


def vadd(u, v) -> tuple:
    if len(u) != len(v):
        raise ValueError("vector dimension mismatch")
    return tuple(add(a, b) for a, b in zip(u, v))


def vscale(c, v) -> tuple:
    c = as_expr(c)
    return tuple(mul(c, a) for a in v)


def vzero(dim: int) -> tuple:
    return (ZERO,) * dim


def as_vector(value, dim: int) -> tuple:
    """Coerce a string/number (broadcast to x-component) or sequence to a vector."""
    if isinstance(value, (list, tuple)):
        vec = tuple(as_expr(v) for v in value)
    else:
        vec = (as_expr(value),) + (ZERO,) * (dim - 1)
    if len(vec) != dim:
        raise ValueError(f"expected a {dim}-component vector, got {len(vec)} components")
    return vec


# -- handles ----------------------------------------------------------------

class FieldHandle:
    """A space-time scalar field with analytic gradient, Laplacian and time derivative."""

    def __init__(self, expr, dim: int = 1):
        self.expr = as_expr(expr)
        self.dim = dim
        extra = self.expr.free_vars - set(coords(dim)) - {"t"}
        if extra:
            raise ValueError(f"field depends on {sorted(extra)} outside dimension {dim}")

    @cached_property
    def grad_exprs(self):
        return gradient(self.expr, self.dim)

    @cached_property
    def laplacian_expr(self):
        return laplacian(self.expr, self.dim)

    @cached_property
    def dt_expr(self):
        return differentiate(self.expr, "t")

    def _args(self, x, t, y, z):
        return dict(x=x, y=y, z=z, t=t)

    def value(self, x, t=0.0, y=0.0, z=0.0):
        return self.expr(**self._args(x, t, y, z))

    def gradient(self, x, t=0.0, y=0.0, z=0.0):
        return np.array([g(**self._args(x, t, y, z)) for g in self.grad_exprs])

    def laplacian(self, x, t=0.0, y=0.0, z=0.0):
        return self.laplacian_expr(**self._args(x, t, y, z))

    def time_derivative(self, x, t=0.0, y=0.0, z=0.0):
        return self.dt_expr(**self._args(x, t, y, z))

    def __repr__(self):
        return f"FieldHandle({str(self.expr)!r}, dim={self.dim})"


class ScalarSignal:
    """A function of t alone together with its analytic derivative."""

    def __init__(self, expr):
        self.expr = as_expr(expr)
        if self.expr.depends_on(*SPACE):
            raise ValueError(f"signal {self.expr} must depend on t only")

    @cached_property
    def derivative_expr(self):
        return differentiate(self.expr, "t")

    def value(self, t):
        return self.expr(t=t)

    def derivative(self, t):
        return self.derivative_expr(t=t)

    def __repr__(self):
        return f"ScalarSignal({str(self.expr)!r})"


def field_handle(e, dim: int = 1) -> FieldHandle:
    return FieldHandle(e, dim)
