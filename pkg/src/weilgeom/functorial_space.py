"""Points of a chart at a Weil stage and the infinitesimal neighbour calculus.

A point at stage ``R[eps]/(eps^(K+1))`` is a base point ``p`` of the chart
together with a nilpotent displacement ``v``; it sends a smooth function
``f`` to ``f(p + v)``.  Two such points are k-th order neighbours when they
share a base and every generator-wise difference is nilpotent of index at
most ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ArityError, NotNilpotent
from .smooth_expr import SmoothExpr, compose, eval_real, partial
from .weil_algebra import (
    TAU_NIL,
    WeilElement,
    lift_const,
    lift_expr,
    nilpotency_index,
    nilpotent_part,
    truncate,
)

INF = math.inf


class WeilPoint:
    """``ev_p + v``: base point plus nilpotent displacement."""

    __slots__ = ("base", "displacement", "order")

    def __init__(self, base: Sequence[float], displacement: Sequence[WeilElement] | None = None,
                 order: int | None = None, tol: float = TAU_NIL):
        base = tuple(float(x) for x in base)
        if displacement is None:
            if order is None:
                raise ValueError("give either a displacement or an order")
            displacement = [WeilElement(np.zeros(order + 1)) for _ in base]
        displacement = tuple(displacement)
        if len(displacement) != len(base):
            raise ArityError(
                f"base has {len(base)} coordinates but displacement has {len(displacement)}"
            )
        orders = {d.order for d in displacement}
        if order is None:
            if not orders:
                raise ValueError("order is required for a point with no generators")
            order = orders.pop()
            orders.add(order)
        if orders - {order}:
            raise ArityError(f"displacement orders {sorted(orders)} differ from {order}")
        for d in displacement:
            if abs(d.real) > tol:
                raise NotNilpotent(f"displacement component has real part {d.real!r}")
        self.base = base
        self.displacement = displacement
        self.order = int(order)

    @property
    def n(self) -> int:
        return len(self.base)

    @classmethod
    def evaluation(cls, base: Sequence[float], order: int) -> "WeilPoint":
        """The point ``ev_p`` with zero displacement."""
        return cls(base, order=order)

    @classmethod
    def probe(cls, base: Sequence[float], order: int, direction: int = 1) -> "WeilPoint":
        """``ev_p`` displaced by a unit ``eps`` along generator ``direction`` (1-based)."""
        if not 1 <= direction <= len(base):
            raise ArityError(f"direction {direction} out of range 1..{len(base)}")
        disp = [WeilElement(np.zeros(order + 1)) for _ in base]
        disp[direction - 1] = WeilElement.epsilon(order)
        return cls(base, disp, order)

    def coordinates(self) -> list[WeilElement]:
        """Images ``p_i + v_i`` of the generators."""
        return [d + b for b, d in zip(self.base, self.displacement)]

    def truncate(self, order: int) -> "WeilPoint":
        return WeilPoint(self.base, [truncate(d, order) for d in self.displacement], order)

    def __eq__(self, other):
        if not isinstance(other, WeilPoint):
            return NotImplemented
        return (self.order == other.order and self.base == other.base
                and self.displacement == other.displacement)

    def __hash__(self):
        return hash((self.base, self.displacement, self.order))

    def __repr__(self):
        disp = [d.coeffs.tolist() for d in self.displacement]
        return f"WeilPoint(base={list(self.base)}, displacement={disp})"

    def to_json(self) -> dict:
        return {"base": list(self.base), "displacement": [d.to_json() for d in self.displacement]}

    @classmethod
    def from_json(cls, data: dict, order: int | None = None) -> "WeilPoint":
        base = data["base"]
        if "displacement" not in data or data["displacement"] is None:
            return cls(base, order=1 if order is None else order)
        disp = [WeilElement.from_json(d) for d in data["displacement"]]
        point = cls(base, disp, order=None if disp else order)
        if order is not None and order != point.order:
            point = point.truncate(order)
        return point


def evaluate(f: SmoothExpr, rho: WeilPoint) -> WeilElement:
    """``rho(f)``: the Weil-valued value of ``f`` at the point."""
    if f.n != rho.n:
        raise ArityError(f"expression over {f.n} generators, point over {rho.n}")
    if rho.n == 0:
        return lift_const(f, rho.order)
    return lift_expr(f, rho.coordinates())


def _check_shapes(rho: WeilPoint, sigma: WeilPoint):
    if rho.n != sigma.n or rho.order != sigma.order:
        raise ArityError(
            f"points differ in shape: n={rho.n}/{sigma.n}, K={rho.order}/{sigma.order}"
        )


def qdist(rho: WeilPoint, sigma: WeilPoint, tol: float = TAU_NIL) -> float | int:
    """Least ``k`` with ``rho ~_k sigma``; ``INF`` when the bases differ."""
    _check_shapes(rho, sigma)
    worst = 0
    for a, b, da, db in zip(rho.base, sigma.base, rho.displacement, sigma.displacement):
        if abs(b - a) > tol:
            return INF
        worst = max(worst, nilpotency_index(db - da, tol))
    return worst


def neighbour(rho: WeilPoint, sigma: WeilPoint, k: int, tol: float = TAU_NIL) -> bool:
    """The k-th order neighbouring relation."""
    if k < 0:
        raise ValueError("neighbour order must be non-negative")
    return qdist(rho, sigma, tol) <= k


@dataclass(frozen=True)
class Monad:
    """The set of points within quasi-distance ``radius`` of ``center``."""

    center: WeilPoint
    radius: int

    def __post_init__(self):
        if not 0 <= self.radius <= self.center.order:
            raise ValueError(f"radius {self.radius} outside 0..{self.center.order}")

    def __contains__(self, sigma: WeilPoint) -> bool:
        return monad_contains(self, sigma)


def monad_contains(m: Monad, sigma: WeilPoint, tol: float = TAU_NIL) -> bool:
    return neighbour(m.center, sigma, m.radius, tol)


def pushforward(G: Sequence[SmoothExpr], rho: WeilPoint) -> WeilPoint:
    """Image of ``rho`` under the smooth map with components ``G``."""
    for g in G:
        if g.n != rho.n:
            raise ArityError(f"map component over {g.n} generators, point over {rho.n}")
    base = [eval_real(g, rho.base) for g in G]
    disp = [nilpotent_part(evaluate(g, rho)) for g in G]
    return WeilPoint(base, disp, rho.order)


def apply_derivation(X: Sequence[SmoothExpr], f: SmoothExpr) -> SmoothExpr:
    """``X f = sum_i a_i * df/dx_i`` for the vector field with coefficients ``X``."""
    if len(X) != f.n or any(a.n != f.n for a in X):
        raise ArityError(f"derivation with {len(X)} coefficients on {f.n} generators")
    out = SmoothExpr.const(0.0, f.n)
    for i, a in enumerate(X, start=1):
        out = out + a * partial(f, i)
    return out


def lifted_derivation(X: Sequence[SmoothExpr], f: SmoothExpr, rho: WeilPoint) -> WeilElement:
    """The lifted derivation applied to the lift of ``f``, read at ``rho``."""
    return evaluate(apply_derivation(X, f), rho)


def identity_map(n: int) -> list[SmoothExpr]:
    return [SmoothExpr.var(i, n) for i in range(1, n + 1)]


def compose_maps(H: Sequence[SmoothExpr], G: Sequence[SmoothExpr]) -> list[SmoothExpr]:
    """Components of ``H o G``."""
    return [compose(h, list(G)) for h in H]
