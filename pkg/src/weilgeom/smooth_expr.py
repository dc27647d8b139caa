"""Expression trees for elements of finitely generated smooth-function rings.

A :class:`SmoothExpr` is a tree over ``n`` generators ``x1 .. xn`` built
from constants, sums, products, integer powers and a closed set of smooth
primitives.  Trees are immutable and compared structurally.

Concrete syntax (whitespace is insignificant)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := primary ("^" ["-"] INTEGER)*
    primary := NUMBER | VARIABLE | NAME "(" expr ")" | "(" expr ")"

``VARIABLE`` is one of ``x1 .. x999``; ``NAME`` is one of
``exp log sin cos tan sqrt atan tanh recip``; ``NUMBER`` is a decimal
literal with optional exponent.  ``a - b`` is stored as
``a + (-1.0) * b``, ``a / b`` as ``a * recip(b)`` and ``-c`` for a literal
``c`` as the constant ``-c``.  The printer emits the fully parenthesised
form, which parses back to the identical tree.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

from .errors import ArityError, DomainError, ParseError

PRIMITIVES = ("exp", "log", "sin", "cos", "tan", "sqrt", "atan", "tanh", "recip")
# ``pow_int`` is the primitive realised by the Pow node (``^`` in the grammar).
PRIMITIVE_IDS = PRIMITIVES + ("pow_int",)


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class Const:
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"constant must be finite, got {self.value!r}")


@dataclass(frozen=True)
class Add:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Mul:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Prim:
    name: str
    arg: "Node"

    def __post_init__(self):
        if self.name not in PRIMITIVES:
            raise ValueError(f"unknown primitive {self.name!r}")


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


Node = Union[Var, Const, Add, Mul, Prim, Pow]

ZERO = Const(0.0)
ONE = Const(1.0)
MINUS_ONE = Const(-1.0)


@dataclass(frozen=True)
class SmoothExpr:
    """An expression tree together with its generator count ``n``."""

    node: Node
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ArityError("generator count must be non-negative")
        top = max_var_index(self.node)
        if top > self.n:
            raise ArityError(f"variable x{top} out of range for {self.n} generators")

    @classmethod
    def var(cls, i: int, n: int) -> "SmoothExpr":
        if not 1 <= i <= n:
            raise ArityError(f"variable index {i} out of range 1..{n}")
        return cls(Var(i), n)

    @classmethod
    def const(cls, c: float, n: int) -> "SmoothExpr":
        return cls(Const(float(c)), n)

    def _coerce(self, other) -> "SmoothExpr":
        if isinstance(other, SmoothExpr):
            if other.n != self.n:
                raise ArityError(f"arity mismatch: {self.n} vs {other.n}")
            return other
        return SmoothExpr(Const(float(other)), self.n)

    def __add__(self, other):
        return SmoothExpr(Add(self.node, self._coerce(other).node), self.n)

    def __radd__(self, other):
        return SmoothExpr(Add(self._coerce(other).node, self.node), self.n)

    def __mul__(self, other):
        return SmoothExpr(Mul(self.node, self._coerce(other).node), self.n)

    def __rmul__(self, other):
        return SmoothExpr(Mul(self._coerce(other).node, self.node), self.n)

    def __neg__(self):
        return SmoothExpr(Mul(MINUS_ONE, self.node), self.n)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __truediv__(self, other):
        return SmoothExpr(Mul(self.node, Prim("recip", self._coerce(other).node)), self.n)

    def __rtruediv__(self, other):
        return SmoothExpr(Mul(self._coerce(other).node, Prim("recip", self.node)), self.n)

    def __pow__(self, m: int):
        if not isinstance(m, int):
            raise TypeError("only integer powers are supported")
        return SmoothExpr(Pow(self.node, m), self.n)

    def apply(self, name: str) -> "SmoothExpr":
        """Wrap the tree in primitive ``name``."""
        return SmoothExpr(Prim(name, self.node), self.n)

    def __call__(self, *p: float) -> float:
        return eval_real(self, p)

    def __str__(self):
        return to_string(self)


def max_var_index(node: Node) -> int:
    top = 0
    stack = [node]
    seen = set()
    while stack:
        nd = stack.pop()
        if id(nd) in seen:
            continue
        seen.add(id(nd))
        if isinstance(nd, Var):
            top = max(top, nd.index)
        elif isinstance(nd, (Add, Mul)):
            stack.extend((nd.left, nd.right))
        elif isinstance(nd, Prim):
            stack.append(nd.arg)
        elif isinstance(nd, Pow):
            stack.append(nd.base)
    return top


def fn(name: str, f: SmoothExpr) -> SmoothExpr:
    return f.apply(name)


# --------------------------------------------------------------------------
# printing and parsing


def _node_str(nd: Node) -> str:
    if isinstance(nd, Var):
        return f"x{nd.index}"
    if isinstance(nd, Const):
        text = repr(float(nd.value))
        return f"({text})" if text.startswith("-") else text
    if isinstance(nd, Add):
        return f"({_node_str(nd.left)} + {_node_str(nd.right)})"
    if isinstance(nd, Mul):
        return f"({_node_str(nd.left)} * {_node_str(nd.right)})"
    if isinstance(nd, Prim):
        return f"{nd.name}({_node_str(nd.arg)})"
    if isinstance(nd, Pow):
        return f"({_node_str(nd.base)} ^ {nd.exponent})"
    raise TypeError(f"not an expression node: {nd!r}")


def to_string(f: SmoothExpr) -> str:
    """Fully parenthesised canonical text of ``f``."""
    return _node_str(f.node)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)
_VAR_NAME = re.compile(r"x([1-9]\d{0,2})")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", len(text[:pos].encode()))
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), len(text[:start].encode())))
        pos = m.end()
    tokens.append(("end", "", len(text.encode())))
    return tokens


class _Parser:
    def __init__(self, text: str, n: int):
        self.tokens = _tokenize(text)
        self.i = 0
        self.n = n

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, off = self.take()
        if text != value or kind not in ("op",):
            raise ParseError(f"expected {value!r}, found {text or 'end of input'!r}", off)

    def parse(self) -> Node:
        node = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {text!r}", off)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = Add(node, rhs if op == "+" else _negate(rhs))
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            node = Mul(node, rhs if op == "*" else Prim("recip", rhs))
        return node

    def unary(self) -> Node:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return _negate(self.unary())
        return self.power()

    def power(self) -> Node:
        node = self.primary()
        while self.peek()[:2] == ("op", "^"):
            self.take()
            node = Pow(node, self.integer())
        return node

    def integer(self) -> int:
        sign = 1
        paren = False
        if self.peek()[:2] == ("op", "("):
            self.take()
            paren = True
        if self.peek()[:2] == ("op", "-"):
            self.take()
            sign = -1
        kind, text, off = self.take()
        if kind != "num" or not text.isdigit():
            raise ParseError(f"exponent must be an integer literal, found {text!r}", off)
        if paren:
            self.expect(")")
        return sign * int(text)

    def primary(self) -> Node:
        kind, text, off = self.take()
        if kind == "num":
            return Const(float(text))
        if kind == "name":
            m = _VAR_NAME.fullmatch(text)
            if m:
                idx = int(m.group(1))
                if idx > self.n:
                    raise ParseError(
                        f"variable {text} out of range for {self.n} generators", off
                    )
                return Var(idx)
            if text in PRIMITIVES:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Prim(text, arg)
            raise ParseError(f"unknown identifier {text!r}", off)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected token {text or 'end of input'!r}", off)


def _negate(nd: Node) -> Node:
    if isinstance(nd, Const):
        return Const(-nd.value)
    return Mul(MINUS_ONE, nd)


def parse(text: str, n: int) -> SmoothExpr:
    """Parse ``text`` into a tree over ``n`` generators."""
    return SmoothExpr(_Parser(text, n).parse(), n)


# --------------------------------------------------------------------------
# real evaluation


def _real_prim(name: str, x: float) -> float:
    try:
        if name == "exp":
            return math.exp(x)
        if name == "log":
            if x <= 0.0:
                raise DomainError("log", x)
            return math.log(x)
        if name == "sin":
            return math.sin(x)
        if name == "cos":
            return math.cos(x)
        if name == "tan":
            return math.tan(x)
        if name == "sqrt":
            if x < 0.0:
                raise DomainError("sqrt", x)
            return math.sqrt(x)
        if name == "atan":
            return math.atan(x)
        if name == "tanh":
            return math.tanh(x)
        if name == "recip":
            if x == 0.0:
                raise DomainError("recip", x)
            return 1.0 / x
    except (OverflowError, ValueError) as exc:
        raise DomainError(name, x) from exc
    raise ValueError(f"unknown primitive {name!r}")


def _real_pow(x: float, m: int) -> float:
    if m < 0 and x == 0.0:
        raise DomainError("pow_int", x)
    try:
        return x**m
    except OverflowError as exc:
        raise DomainError("pow_int", x) from exc


def eval_real(f: SmoothExpr, p: Sequence[float]) -> float:
    """Value of ``f`` at the real point ``p``."""
    if len(p) != f.n:
        raise ArityError(f"expected {f.n} coordinates, got {len(p)}")
    p = [float(v) for v in p]
    memo: dict[int, float] = {}

    def ev(nd: Node) -> float:
        key = id(nd)
        if key in memo:
            return memo[key]
        if isinstance(nd, Var):
            val = p[nd.index - 1]
        elif isinstance(nd, Const):
            val = nd.value
        elif isinstance(nd, Add):
            val = ev(nd.left) + ev(nd.right)
        elif isinstance(nd, Mul):
            val = ev(nd.left) * ev(nd.right)
        elif isinstance(nd, Prim):
            val = _real_prim(nd.name, ev(nd.arg))
        elif isinstance(nd, Pow):
            val = _real_pow(ev(nd.base), nd.exponent)
        else:
            raise TypeError(f"not an expression node: {nd!r}")
        memo[key] = val
        return val

    return ev(f.node)


# --------------------------------------------------------------------------
# symbolic differentiation and composition
#
# The helpers below fold neutral constants so that iterated derivatives stay
# small.  They never alter values.


def _add(a: Node, b: Node) -> Node:
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    return Add(a, b)


def _mul(a: Node, b: Node) -> Node:
    if a == ZERO or b == ZERO:
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    return Mul(a, b)


def _pow(a: Node, m: int) -> Node:
    if m == 0:
        return ONE
    if m == 1:
        return a
    return Pow(a, m)


def _prim_derivative(name: str, u: Node) -> Node:
    """d/du name(u) as a tree in ``u``."""
    if name == "exp":
        return Prim("exp", u)
    if name == "log":
        return Prim("recip", u)
    if name == "sin":
        return Prim("cos", u)
    if name == "cos":
        return Mul(MINUS_ONE, Prim("sin", u))
    if name == "tan":
        return Add(ONE, Pow(Prim("tan", u), 2))
    if name == "sqrt":
        return Mul(Const(0.5), Prim("recip", Prim("sqrt", u)))
    if name == "atan":
        return Prim("recip", Add(ONE, Pow(u, 2)))
    if name == "tanh":
        return Add(ONE, Mul(MINUS_ONE, Pow(Prim("tanh", u), 2)))
    if name == "recip":
        return Mul(MINUS_ONE, Pow(Prim("recip", u), 2))
    raise ValueError(f"unknown primitive {name!r}")


def partial(f: SmoothExpr, i: int) -> SmoothExpr:
    """Symbolic partial derivative of ``f`` with respect to ``x_i``."""
    if not 1 <= i <= f.n:
        raise ArityError(f"generator index {i} out of range 1..{f.n}")
    memo: dict[int, Node] = {}

    def d(nd: Node) -> Node:
        key = id(nd)
        if key in memo:
            return memo[key]
        if isinstance(nd, Var):
            out = ONE if nd.index == i else ZERO
        elif isinstance(nd, Const):
            out = ZERO
        elif isinstance(nd, Add):
            out = _add(d(nd.left), d(nd.right))
        elif isinstance(nd, Mul):
            out = _add(_mul(d(nd.left), nd.right), _mul(nd.left, d(nd.right)))
        elif isinstance(nd, Pow):
            m = nd.exponent
            inner = d(nd.base)
            if m == 0 or inner == ZERO:
                out = ZERO
            else:
                out = _mul(_mul(Const(float(m)), _pow(nd.base, m - 1)), inner)
        elif isinstance(nd, Prim):
            inner = d(nd.arg)
            out = ZERO if inner == ZERO else _mul(_prim_derivative(nd.name, nd.arg), inner)
        else:
            raise TypeError(f"not an expression node: {nd!r}")
        memo[key] = out
        return out

    return SmoothExpr(d(f.node), f.n)


def compose(theta: SmoothExpr, omegas: Sequence[SmoothExpr]) -> SmoothExpr:
    """Substitute ``omegas[j]`` for ``x_{j+1}`` in ``theta``.

    The result has the common arity of the ``omegas``.
    """
    if len(omegas) != theta.n:
        raise ArityError(f"theta takes {theta.n} arguments, got {len(omegas)}")
    arities = {w.n for w in omegas}
    if len(arities) > 1:
        raise ArityError(f"inner expressions have differing arities {sorted(arities)}")
    if not omegas:
        raise ArityError("cannot infer arity of a composition with no inner expressions")
    n = arities.pop()
    subs = [w.node for w in omegas]
    memo: dict[int, Node] = {}

    def sub(nd: Node) -> Node:
        key = id(nd)
        if key in memo:
            return memo[key]
        if isinstance(nd, Var):
            out = subs[nd.index - 1]
        elif isinstance(nd, Const):
            out = nd
        elif isinstance(nd, Add):
            out = Add(sub(nd.left), sub(nd.right))
        elif isinstance(nd, Mul):
            out = Mul(sub(nd.left), sub(nd.right))
        elif isinstance(nd, Prim):
            out = Prim(nd.name, sub(nd.arg))
        elif isinstance(nd, Pow):
            out = Pow(sub(nd.base), nd.exponent)
        else:
            raise TypeError(f"not an expression node: {nd!r}")
        memo[key] = out
        return out

    return SmoothExpr(sub(theta.node), n)


def extend_arity(f: SmoothExpr, n: int) -> SmoothExpr:
    """Regard ``f`` as a function of ``n >= f.n`` generators."""
    if n < f.n:
        raise ArityError(f"cannot shrink arity from {f.n} to {n}")
    return SmoothExpr(f.node, n)
