"""Curvature of a metric evaluated at points carrying nilpotent displacements.

Metric components are smooth expressions.  Their first and second partials
are taken symbolically, every tree is then evaluated at a :class:`WeilPoint`,
and the Levi-Civita chain (Christoffel, Riemann, Ricci, scalar, Einstein,
Kretschmann) is assembled in the truncated ring.  Tensors are dense numpy
arrays whose trailing axis holds the jet coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .errors import ArityError, SingularMetric
from .functorial_space import WeilPoint
from .smooth_expr import Const, SmoothExpr, parse, partial
from .weil_algebra import TAU_INV, WeilElement, lift_node

# --------------------------------------------------------------------------
# jet-valued array algebra


@lru_cache(maxsize=None)
def _product_table(order: int) -> np.ndarray:
    K1 = order + 1
    table = np.zeros((K1, K1, K1))
    for i in range(K1):
        for j in range(K1 - i):
            table[i, j, i + j] = 1.0
    return table


def jeinsum(subscripts: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``np.einsum`` over two jet-valued arrays with truncated products.

    Subscripts name the tensor axes only (lowercase); the trailing jet axis
    is handled implicitly.
    """
    inputs, out = subscripts.split("->")
    sa, sb = inputs.split(",")
    table = _product_table(a.shape[-1] - 1)
    return np.einsum(f"{sa}X,{sb}Y,XYZ->{out}Z", a, b, table, optimize=True)


def jmatmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return jeinsum("ij,jk->ik", a, b)


# --------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class Convention:
    """Sign ``s`` in ``Ric + s/2 R g + Lambda g`` and the cosmological constant."""

    sign: int = -1
    cosmological_constant: float = 0.0

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"Einstein sign must be +1 or -1, got {self.sign!r}")


STANDARD = Convention()


@dataclass(frozen=True)
class TensorValue:
    """Dense tensor of Weil elements; ``data.shape == (n,) * rank + (K+1,)``."""

    data: np.ndarray
    variance: tuple = ()

    @property
    def order(self) -> int:
        return self.data.shape[-1] - 1

    @property
    def shape(self) -> tuple:
        return self.data.shape[:-1]

    @property
    def rank(self) -> int:
        return self.data.ndim - 1

    def __getitem__(self, idx) -> WeilElement:
        if not isinstance(idx, tuple):
            idx = (idx,)
        if len(idx) != self.rank:
            raise IndexError(f"tensor of rank {self.rank} indexed with {len(idx)} indices")
        return WeilElement(self.data[idx])

    def real(self) -> np.ndarray:
        return project_real(self)

    def to_json(self):
        def rec(arr):
            if arr.ndim == 1:
                return WeilElement(arr).to_json()
            return [rec(sub) for sub in arr]

        return rec(self.data)


def project_real(T: TensorValue | WeilElement) -> np.ndarray | float:
    """Entrywise real part."""
    if isinstance(T, WeilElement):
        return T.real
    return np.array(T.data[..., 0])


def scalar_element(data: np.ndarray) -> WeilElement:
    return WeilElement(data)


@dataclass(frozen=True)
class MetricSpec:
    """Symmetric matrix of smooth expressions over ``dim`` generators."""

    components: tuple
    signature: tuple | None = None

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.components)
        object.__setattr__(self, "components", rows)
        n = len(rows)
        for i, row in enumerate(rows):
            if len(row) != n:
                raise ArityError(f"metric row {i} has {len(row)} entries, expected {n}")
            for j, g in enumerate(row):
                if g.n != n:
                    raise ArityError(f"component ({i},{j}) has arity {g.n}, expected {n}")
        for i in range(n):
            for j in range(i):
                if rows[i][j] != rows[j][i]:
                    raise ValueError(f"metric components ({i},{j}) and ({j},{i}) differ")
        if self.signature is not None and len(self.signature) != n:
            raise ArityError("signature hint has the wrong length")

    @property
    def dim(self) -> int:
        return len(self.components)

    @classmethod
    def from_strings(cls, rows: Sequence[Sequence[str]], signature=None) -> "MetricSpec":
        n = len(rows)
        return cls(tuple(tuple(parse(s, n) for s in row) for row in rows), signature)

    @classmethod
    def diagonal(cls, entries: Sequence[SmoothExpr], signature=None) -> "MetricSpec":
        n = len(entries)
        zero = SmoothExpr.const(0.0, n)
        return cls(
            tuple(tuple(entries[i] if i == j else zero for j in range(n)) for i in range(n)),
            signature,
        )

    @classmethod
    def from_json(cls, data: dict) -> "MetricSpec":
        n = int(data["dim"])
        rows = data["components"]
        if len(rows) != n:
            raise ArityError(f"dim is {n} but {len(rows)} component rows were given")
        return cls.from_strings(rows, data.get("signature"))

    def to_json(self) -> dict:
        out = {"dim": self.dim, "components": [[str(g) for g in row] for row in self.components]}
        if self.signature is not None:
            out["signature"] = list(self.signature)
        return out

    @cached_property
    def first_partials(self) -> dict:
        """``{(k, i, j): d_k g_ij}`` for ``i <= j``."""
        n = self.dim
        return {
            (k, i, j): partial(self.components[i][j], k + 1)
            for k in range(n) for i in range(n) for j in range(i, n)
        }

    @cached_property
    def second_partials(self) -> dict:
        """``{(m, k, i, j): d_m d_k g_ij}`` for ``m <= k`` and ``i <= j``."""
        n = self.dim
        first = self.first_partials
        return {
            (m, k, i, j): partial(first[(k, i, j)], m + 1)
            for m in range(n) for k in range(m, n) for i in range(n) for j in range(i, n)
        }


# --------------------------------------------------------------------------
# lifted geometry


def _lift(tree: SmoothExpr, coords: list, order: int) -> np.ndarray:
    if isinstance(tree.node, Const):
        out = np.zeros(order + 1)
        out[0] = tree.node.value
        return out
    return lift_node(tree.node, coords, order)


def _point_coords(g: MetricSpec, rho: WeilPoint) -> list:
    if rho.n != g.dim:
        raise ArityError(f"metric of dimension {g.dim} evaluated at a point with {rho.n} generators")
    return [c.coeffs for c in rho.coordinates()]


def metric_at(g: MetricSpec, rho: WeilPoint) -> TensorValue:
    n, K = g.dim, rho.order
    coords = _point_coords(g, rho)
    out = np.zeros((n, n, K + 1))
    for i in range(n):
        for j in range(i, n):
            out[i, j] = out[j, i] = _lift(g.components[i][j], coords, K)
    return TensorValue(out, ("down", "down"))


def inverse_metric(G: TensorValue, tol: float = TAU_INV) -> TensorValue:
    """Inverse of a jet-valued symmetric matrix.

    The real-part matrix is inverted with LAPACK; the nilpotent part is then
    absorbed by the finite Neumann series ``sum_j (-A0^-1 N)^j A0^-1``.
    Singularity is judged scale-free: ``|det A0|`` against the product of
    its row norms (Hadamard's bound).
    """
    data = G.data
    a0 = data[..., 0]
    scale = float(np.prod(np.linalg.norm(a0, axis=1)))
    det = float(np.linalg.det(a0))
    if scale == 0.0 or abs(det) <= tol * scale:
        raise SingularMetric(f"metric real part is singular (det={det!r})")
    inv0 = np.zeros_like(data)
    inv0[..., 0] = np.linalg.inv(a0)
    nil = data.copy()
    nil[..., 0] = 0.0
    step = -jmatmul(inv0, nil)
    term = inv0
    total = inv0.copy()
    for _ in range(G.order):
        term = jmatmul(step, term)
        total = total + term
    flipped = tuple("up" if v == "down" else "down" for v in G.variance) or ("up", "up")
    return TensorValue(total, flipped)


class LiftedGeometry:
    """Lazily computed Levi-Civita curvature chain of ``g`` at ``rho``."""

    def __init__(self, g: MetricSpec, rho: WeilPoint, tol: float = TAU_INV):
        self.g = g
        self.rho = rho
        self.tol = tol
        self.n = g.dim
        self.order = rho.order

    @cached_property
    def _coords(self):
        return _point_coords(self.g, self.rho)

    @cached_property
    def metric(self) -> TensorValue:
        return metric_at(self.g, self.rho)

    @cached_property
    def inverse(self) -> TensorValue:
        return inverse_metric(self.metric, self.tol)

    @cached_property
    def _dg(self) -> np.ndarray:
        # _dg[k, i, j] = d_k g_ij
        n, K = self.n, self.order
        out = np.zeros((n, n, n, K + 1))
        for (k, i, j), tree in self.g.first_partials.items():
            out[k, i, j] = out[k, j, i] = _lift(tree, self._coords, K)
        return out

    @cached_property
    def _ddg(self) -> np.ndarray:
        # _ddg[m, k, i, j] = d_m d_k g_ij
        n, K = self.n, self.order
        out = np.zeros((n, n, n, n, K + 1))
        for (m, k, i, j), tree in self.g.second_partials.items():
            val = _lift(tree, self._coords, K)
            out[m, k, i, j] = out[m, k, j, i] = out[k, m, i, j] = out[k, m, j, i] = val
        return out

    @cached_property
    def _christoffel_first(self) -> np.ndarray:
        # [l, j, k] = 1/2 (d_j g_lk + d_k g_jl - d_l g_jk)
        dg = self._dg
        return 0.5 * (
            np.einsum("jlk...->ljk...", dg)
            + np.einsum("kjl...->ljk...", dg)
            - dg
        )

    @cached_property
    def christoffel(self) -> TensorValue:
        """``[i, j, k] = Gamma^i_{jk}``."""
        data = jeinsum("il,ljk->ijk", self.inverse.data, self._christoffel_first)
        return TensorValue(data, ("up", "down", "down"))

    @cached_property
    def _christoffel_derivative(self) -> np.ndarray:
        # [m, i, j, k] = d_m Gamma^i_{jk}
        ginv = self.inverse.data
        ddg = self._ddg
        tmp = jeinsum("ia,mab->mib", ginv, self._dg)
        d_ginv = -jeinsum("mib,bl->mil", tmp, ginv)
        d_first = 0.5 * (
            np.einsum("mjlk...->mljk...", ddg)
            + np.einsum("mkjl...->mljk...", ddg)
            - ddg
        )
        return (
            jeinsum("mil,ljk->mijk", d_ginv, self._christoffel_first)
            + jeinsum("il,mljk->mijk", ginv, d_first)
        )

    @cached_property
    def riemann(self) -> TensorValue:
        """``[i, j, k, l] = R^i_{jkl}``."""
        gam = self.christoffel.data
        dgam = self._christoffel_derivative
        data = (
            np.einsum("kilj...->ijkl...", dgam)
            - np.einsum("likj...->ijkl...", dgam)
            + jeinsum("ikm,mlj->ijkl", gam, gam)
            - jeinsum("ilm,mkj->ijkl", gam, gam)
        )
        return TensorValue(data, ("up", "down", "down", "down"))

    @cached_property
    def ricci(self) -> TensorValue:
        data = np.einsum("ijil...->jl...", self.riemann.data)
        return TensorValue(np.ascontiguousarray(data), ("down", "down"))

    @cached_property
    def scalar(self) -> WeilElement:
        return WeilElement(jeinsum("jl,jl->", self.inverse.data, self.ricci.data))

    def einstein(self, conv: Convention = STANDARD) -> TensorValue:
        G = self.metric.data
        R = self.scalar.coeffs
        data = (
            self.ricci.data
            + conv.sign * 0.5 * jeinsum(",jl->jl", R, G)
            + conv.cosmological_constant * G
        )
        return TensorValue(data, ("down", "down"))

    def effective_stress(self, conv: Convention = STANDARD) -> TensorValue:
        E = self.einstein(conv)
        return TensorValue(E.data / (8.0 * math.pi), E.variance)

    @cached_property
    def kretschmann(self) -> WeilElement:
        ginv = self.inverse.data
        riem = self.riemann.data
        lowered = jeinsum("ia,ajkl->ijkl", self.metric.data, riem)
        raised = jeinsum("ibcd,jb->ijcd", riem, ginv)
        raised = jeinsum("ijcd,kc->ijkd", raised, ginv)
        raised = jeinsum("ijkd,ld->ijkl", raised, ginv)
        return WeilElement(jeinsum("ijkl,ijkl->", lowered, raised))

    def report(self, conv: Convention = STANDARD) -> dict:
        """Every quantity of the chain, JSON-ready."""
        return {
            "metric": self.metric.to_json(),
            "inverse": self.inverse.to_json(),
            "christoffel": self.christoffel.to_json(),
            "riemann": self.riemann.to_json(),
            "ricci": self.ricci.to_json(),
            "scalar": self.scalar.to_json(),
            "einstein": self.einstein(conv).to_json(),
            "kretschmann": self.kretschmann.to_json(),
        }


def christoffel(g: MetricSpec, rho: WeilPoint) -> TensorValue:
    return LiftedGeometry(g, rho).christoffel


def riemann(g: MetricSpec, rho: WeilPoint) -> TensorValue:
    return LiftedGeometry(g, rho).riemann


def ricci(g: MetricSpec, rho: WeilPoint) -> TensorValue:
    return LiftedGeometry(g, rho).ricci


def scalar_curvature(g: MetricSpec, rho: WeilPoint) -> WeilElement:
    return LiftedGeometry(g, rho).scalar


def einstein_tensor(g: MetricSpec, rho: WeilPoint, conv: Convention = STANDARD) -> TensorValue:
    return LiftedGeometry(g, rho).einstein(conv)


def effective_stress(g: MetricSpec, rho: WeilPoint, conv: Convention = STANDARD) -> TensorValue:
    return LiftedGeometry(g, rho).effective_stress(conv)


def kretschmann(g: MetricSpec, rho: WeilPoint) -> WeilElement:
    return LiftedGeometry(g, rho).kretschmann


def classical(g: MetricSpec, rho: WeilPoint) -> LiftedGeometry:
    """The same chain at the plain evaluation ``ev_p`` of the base point."""
    return LiftedGeometry(g, WeilPoint.evaluation(rho.base, 0))
