"""Random expression and point generators plus comparison helpers for the tests."""

import numpy as np

from weilgeom.functorial_space import WeilPoint
from weilgeom.smooth_expr import SmoothExpr
from weilgeom.weil_algebra import WeilElement


def close(a, b, rtol):
    """Relative closeness with a unit floor on the scale."""
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


def all_close(a, b, rtol):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return bool(np.all(np.abs(a - b) <= rtol * scale))


def _wrap(rng, u: SmoothExpr) -> SmoothExpr:
    """Apply a primitive in a way that is defined for every real argument."""
    kind = rng.integers(11)
    if kind == 0:
        return u.apply("sin")
    if kind == 1:
        return u.apply("cos")
    if kind == 2:
        return u.apply("atan")
    if kind == 3:
        return u.apply("tanh")
    if kind == 4:
        return u.apply("tanh").apply("exp")
    if kind == 5:
        return (1.0 + u ** 2).apply("log")
    if kind == 6:
        return (2.0 + u.apply("sin")).apply("sqrt")
    if kind == 7:
        return (2.0 + u.apply("cos")).apply("recip")
    if kind == 8:
        return (0.5 * u.apply("tanh")).apply("tan")
    if kind == 9:
        return u ** int(rng.integers(2, 4))
    return (1.5 + u.apply("sin")) ** -1


def random_expr(rng, n: int, depth: int = 3) -> SmoothExpr:
    """A random tree over ``n`` generators, smooth on all of R^n."""
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.75:
            return SmoothExpr.var(int(rng.integers(1, n + 1)), n)
        return SmoothExpr.const(round(float(rng.uniform(-2, 2)), 3), n)
    choice = rng.integers(4)
    if choice == 0:
        return random_expr(rng, n, depth - 1) + random_expr(rng, n, depth - 1)
    if choice == 1:
        return random_expr(rng, n, depth - 1) * random_expr(rng, n, depth - 1)
    if choice == 2:
        return random_expr(rng, n, depth - 1) - random_expr(rng, n, depth - 1)
    return _wrap(rng, random_expr(rng, n, depth - 1))


def random_weil(rng, order: int, integer: bool = False, real=None) -> WeilElement:
    if integer:
        c = rng.integers(-5, 6, size=order + 1).astype(float)
    else:
        c = rng.uniform(-1, 1, size=order + 1)
    if real is not None:
        c[0] = real
    return WeilElement(c)


def random_nilpotent(rng, order: int, lowest: int | None = None) -> WeilElement:
    """Integer-coefficient nilpotent whose lowest nonzero degree is ``lowest``."""
    if lowest is None:
        lowest = int(rng.integers(1, order + 2))  # order + 1 means zero
    c = np.zeros(order + 1)
    if lowest <= order:
        c[lowest:] = rng.integers(-3, 4, size=order + 1 - lowest)
        c[lowest] = rng.choice([-2, -1, 1, 2])
    return WeilElement(c)


def random_point(rng, n: int, order: int, base=None) -> WeilPoint:
    if base is None:
        base = rng.integers(-2, 3, size=n).astype(float)
    return WeilPoint(base, [random_nilpotent(rng, order) for _ in range(n)], order)


def index_by_powers(d: WeilElement) -> int:
    """Nilpotency index by repeated multiplication: least m with d^(m+1) == 0."""
    power = d
    m = 0
    while np.any(power.coeffs != 0.0):
        power = power * d
        m += 1
        if m > d.order + 1:
            raise AssertionError("not nilpotent")
    return m


def qdist_by_powers(rho: WeilPoint, sigma: WeilPoint):
    if rho.base != sigma.base:
        return float("inf")
    return max(
        (index_by_powers(b - a) for a, b in zip(rho.displacement, sigma.displacement)),
        default=0,
    )


def central_difference(f, p, i, h=1e-5):
    """Central difference of a callable ``f(p)`` along coordinate ``i`` (0-based)."""
    up = list(p)
    dn = list(p)
    up[i] += h
    dn[i] -= h
    return (f(up) - f(dn)) / (2 * h)
