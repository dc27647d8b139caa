"""Truncated polynomial arithmetic in R[eps]/(eps^(K+1)).

Elements are dense coefficient vectors ``(a0, a1, ..., aK)``.  Smooth
expressions act on tuples of elements by forward jet propagation: each
primitive is pushed through with its power-series recurrence, so evaluating
at ``p + eps`` yields the Taylor coefficients of the expression at ``p``.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import ArityError, DomainError, NotInvertible, NotNilpotent, OrderMismatch
from .smooth_expr import Add, Const, Mul, Node, Pow, Prim, SmoothExpr, Var, _real_pow, _real_prim

TAU_NIL = 1e-12
TAU_INV = 1e-12


class WeilElement:
    """``a0 + a1*eps + ... + aK*eps^K`` with ``eps^(K+1) = 0``."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable[float]):
        c = np.array(coeffs, dtype=np.float64).reshape(-1)
        if c.size == 0:
            raise ValueError("a Weil element needs at least one coefficient")
        c.setflags(write=False)
        self._c = c

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def order(self) -> int:
        return self._c.size - 1

    @property
    def real(self) -> float:
        return float(self._c[0])

    @classmethod
    def from_real(cls, c: float, order: int) -> "WeilElement":
        out = np.zeros(order + 1)
        out[0] = c
        return cls(out)

    @classmethod
    def epsilon(cls, order: int, power: int = 1) -> "WeilElement":
        out = np.zeros(order + 1)
        if power <= order:
            out[power] = 1.0
        return cls(out)

    def _other(self, other) -> np.ndarray:
        if isinstance(other, WeilElement):
            if other.order != self.order:
                raise OrderMismatch(f"orders {self.order} and {other.order} differ")
            return other._c
        out = np.zeros_like(self._c)
        out[0] = float(other)
        return out

    def __add__(self, other):
        return WeilElement(self._c + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return WeilElement(self._c - self._other(other))

    def __rsub__(self, other):
        return WeilElement(self._other(other) - self._c)

    def __neg__(self):
        return WeilElement(-self._c)

    def __mul__(self, other):
        if isinstance(other, WeilElement):
            return WeilElement(cauchy(self._c, self._other(other)))
        return WeilElement(self._c * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, WeilElement):
            return self * invert(other)
        return WeilElement(self._c / float(other))

    def __rtruediv__(self, other):
        return invert(self) * other

    def __pow__(self, m: int):
        return WeilElement(_jet_pow(self._c, m))

    def __eq__(self, other):
        if not isinstance(other, WeilElement):
            return NotImplemented
        return self.order == other.order and bool(np.array_equal(self._c, other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def __repr__(self):
        return f"WeilElement({self._c.tolist()})"

    def to_json(self) -> dict:
        return {"order": self.order, "coeffs": [float(x) for x in self._c]}

    @classmethod
    def from_json(cls, data: dict) -> "WeilElement":
        coeffs = data["coeffs"]
        if len(coeffs) != int(data["order"]) + 1:
            raise ValueError(
                f"order {data['order']} needs {int(data['order']) + 1} coefficients, got {len(coeffs)}"
            )
        return cls(coeffs)


WeilVector = Sequence[WeilElement]


def cauchy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of two coefficient vectors, truncated at their common length."""
    return np.convolve(a, b)[: a.size]


def _check_orders(elems: Sequence[WeilElement]) -> int:
    orders = {e.order for e in elems}
    if len(orders) > 1:
        raise OrderMismatch(f"mixed orders {sorted(orders)}")
    return orders.pop()


# --------------------------------------------------------------------------
# ring operations


def add(a: WeilElement, b: WeilElement) -> WeilElement:
    _check_orders((a, b))
    return a + b


def neg(a: WeilElement) -> WeilElement:
    return -a


def mul(a: WeilElement, b: WeilElement) -> WeilElement:
    _check_orders((a, b))
    return a * b


def from_real(c: float, order: int) -> WeilElement:
    return WeilElement.from_real(c, order)


def epsilon(order: int) -> WeilElement:
    return WeilElement.epsilon(order)


def real_part(a: WeilElement) -> float:
    return a.real


def nilpotent_part(a: WeilElement) -> WeilElement:
    c = a.coeffs.copy()
    c[0] = 0.0
    return WeilElement(c)


def nilpotency_index(d: WeilElement, tol: float = TAU_NIL) -> int:
    """Smallest ``m`` with ``d^(m+1) = 0``.

    With ``v`` the lowest degree carrying a nonzero coefficient this is
    ``K // v``; the zero element gives 0.
    """
    if abs(d.real) > tol:
        raise NotNilpotent(f"real part {d.real!r} exceeds tolerance {tol!r}")
    nz = np.flatnonzero(d.coeffs[1:])
    if nz.size == 0:
        return 0
    return d.order // int(nz[0] + 1)


def _neumann_inverse(c: np.ndarray) -> np.ndarray:
    # a^-1 = a0^-1 * sum_j (-d/a0)^j, j = 0..K, evaluated Horner-style
    a0 = c[0]
    x = -c / a0
    x[0] = 0.0
    total = np.zeros_like(c)
    total[0] = 1.0
    for _ in range(c.size - 1):
        total = cauchy(x, total)
        total[0] += 1.0
    return total / a0


def invert(a: WeilElement, tol: float = TAU_INV) -> WeilElement:
    """Multiplicative inverse; exists iff the real part is nonzero."""
    if abs(a.real) <= tol:
        raise NotInvertible(f"real part {a.real!r} is within {tol!r} of zero")
    return WeilElement(_neumann_inverse(a.coeffs.astype(np.float64)))


def truncate(a: WeilElement, order: int) -> WeilElement:
    """Image of ``a`` under the stage change to order ``order``."""
    if not 0 <= order <= a.order:
        raise ValueError(f"truncation order {order} outside 0..{a.order}")
    return WeilElement(a.coeffs[: order + 1])


# --------------------------------------------------------------------------
# jet propagation through smooth primitives


def _jet_pow(a: np.ndarray, m: int) -> np.ndarray:
    if m < 0:
        if a[0] == 0.0:
            raise DomainError("pow_int", float(a[0]))
        a = _neumann_inverse(a)
        m = -m
    result = np.zeros_like(a)
    result[0] = 1.0
    base = a
    while m:
        if m & 1:
            result = cauchy(result, base)
        m >>= 1
        if m:
            base = cauchy(base, base)
    return result


def _jet_prim(name: str, a: np.ndarray) -> np.ndarray:
    """Coefficients of ``name(a)`` for the jet ``a``.

    Each primitive satisfies a first-order linear relation ``b' = h * a'``;
    matching coefficients of ``k * t^(k-1)`` gives an O(K^2) recurrence.
    """
    K = a.size - 1
    b = np.zeros(K + 1)
    b[0] = _real_prim(name, float(a[0]))
    if K == 0:
        return b
    ja = np.arange(K + 1) * a  # j * a_j
    if name == "exp":
        for k in range(1, K + 1):
            b[k] = ja[1 : k + 1] @ b[k - 1 :: -1][:k] / k
    elif name in ("sin", "cos"):
        s = np.zeros(K + 1)
        c = np.zeros(K + 1)
        s[0] = np.sin(a[0])
        c[0] = np.cos(a[0])
        for k in range(1, K + 1):
            s[k] = ja[1 : k + 1] @ c[k - 1 :: -1][:k] / k
            c[k] = -(ja[1 : k + 1] @ s[k - 1 :: -1][:k]) / k
        b = s if name == "sin" else c
    elif name in ("tan", "tanh"):
        # b' = (1 +/- b^2) a'
        sign = 1.0 if name == "tan" else -1.0
        u = np.zeros(K + 1)
        u[0] = 1.0 + sign * b[0] * b[0]
        for k in range(1, K + 1):
            b[k] = ja[1 : k + 1] @ u[k - 1 :: -1][:k] / k
            u[k] = sign * (b[: k + 1] @ b[k::-1])
    elif name == "log":
        # a b' = a'
        jb = np.zeros(K + 1)
        for k in range(1, K + 1):
            acc = k * a[k] - jb[1:k] @ a[k - 1 : 0 : -1]
            b[k] = acc / (k * a[0])
            jb[k] = k * b[k]
    elif name == "sqrt":
        if a[0] == 0.0:
            raise DomainError("sqrt", float(a[0]))
        for k in range(1, K + 1):
            b[k] = (a[k] - b[1:k] @ b[k - 1 : 0 : -1]) / (2.0 * b[0])
    elif name == "atan":
        # (1 + a^2) b' = a'
        w = cauchy(a, a)
        w[0] += 1.0
        jb = np.zeros(K + 1)
        for k in range(1, K + 1):
            acc = k * a[k] - jb[1:k] @ w[k - 1 : 0 : -1]
            b[k] = acc / (k * w[0])
            jb[k] = k * b[k]
    elif name == "recip":
        b = _neumann_inverse(a)
    else:
        raise ValueError(f"unknown primitive {name!r}")
    return b


def lift_node(node: Node, args: Sequence[np.ndarray], order: int) -> np.ndarray:
    """Propagate raw coefficient vectors through ``node``."""
    memo: dict[int, np.ndarray] = {}

    def ev(nd: Node) -> np.ndarray:
        key = id(nd)
        if key in memo:
            return memo[key]
        if isinstance(nd, Var):
            val = args[nd.index - 1]
        elif isinstance(nd, Const):
            val = np.zeros(order + 1)
            val[0] = nd.value
        elif isinstance(nd, Add):
            val = ev(nd.left) + ev(nd.right)
        elif isinstance(nd, Mul):
            val = cauchy(ev(nd.left), ev(nd.right))
        elif isinstance(nd, Prim):
            val = _jet_prim(nd.name, ev(nd.arg))
        elif isinstance(nd, Pow):
            base = ev(nd.base)
            _real_pow(float(base[0]), nd.exponent)  # domain check on the real part
            val = _jet_pow(base, nd.exponent)
        else:
            raise TypeError(f"not an expression node: {nd!r}")
        memo[key] = val
        return val

    return ev(node)


def lift_expr(f: SmoothExpr, args: WeilVector) -> WeilElement:
    """Value of ``f`` at a tuple of Weil elements."""
    if len(args) != f.n:
        raise ArityError(f"expected {f.n} arguments, got {len(args)}")
    if not args:
        # constant expression: order cannot be inferred from the arguments
        raise ArityError("lift_expr needs at least one argument; use lift_const")
    order = _check_orders(args)
    return WeilElement(lift_node(f.node, [a.coeffs for a in args], order))


def lift_const(f: SmoothExpr, order: int) -> WeilElement:
    """Value of a nullary expression at stage ``order``."""
    if f.n != 0:
        raise ArityError("lift_const only accepts expressions with no generators")
    return WeilElement(lift_node(f.node, [], order))
