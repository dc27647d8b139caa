"""Backward evolution of a Robertson-Walker space-time towards its initial singularity.

The metric is ``-dt^2 + S(t)^2 h_kappa`` in coordinates ``(t, x, y, z)``.
While the scale factor stays above ``s_min`` the run samples curvature
invariants on a geometric time grid at a probe point displaced by ``eps``
along the time generator.  Once ``S(t) <= s_min`` time is frozen and the
run emits the shrinking sequence of monads ``M_K, M_(K-1), ..., M_0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigError
from .functorial_space import Monad, WeilPoint
from .jet_geometry import Convention, LiftedGeometry, MetricSpec
from .smooth_expr import SmoothExpr, compose, eval_real, parse, partial
from .weil_algebra import WeilElement

CSV_HEADER = (
    "t,S,Sdot,R_re,R_eps1,kretschmann_re,kretschmann_eps1,density,pressure,phase,k"
)
MACROSCOPIC = "macroscopic"
COLLAPSE = "collapse"


def power_law(q: float) -> SmoothExpr:
    """``S(t) = t^q`` as an expression in one generator."""
    t = SmoothExpr.var(1, 1)
    if float(q).is_integer():
        return t ** int(q) if q else SmoothExpr.const(1.0, 1)
    return (float(q) * t.apply("log")).apply("exp")


def _sinh(x: SmoothExpr) -> SmoothExpr:
    return 0.5 * (x.apply("exp") - (-x).apply("exp"))


def rwfl_metric(kappa: int, S: SmoothExpr) -> MetricSpec:
    """Four-dimensional metric for curvature parameter ``kappa`` and scale factor ``S``."""
    if kappa not in (-1, 0, 1):
        raise ConfigError(f"kappa must be -1, 0 or 1, got {kappa!r}")
    if S.n != 1:
        raise ConfigError(f"scale factor must be a function of t alone, got arity {S.n}")
    n = 4
    coords = [SmoothExpr.var(i, n) for i in range(1, n + 1)]
    s2 = compose(S, [coords[0]]) ** 2
    if kappa == 0:
        spatial = [s2, s2, s2]
    else:
        chi, theta = coords[1], coords[2]
        radial = chi.apply("sin") if kappa == 1 else _sinh(chi)
        spatial = [s2, s2 * radial ** 2, s2 * radial ** 2 * theta.apply("sin") ** 2]
    return MetricSpec.diagonal([SmoothExpr.const(-1.0, n)] + spatial, (-1, 1, 1, 1))


@dataclass
class RwflConfig:
    kappa: int = 0
    scale: SmoothExpr | None = None
    order: int = 1
    t_start: float = 1.0
    t_end: float = 1e-4
    ratio: float = 0.5
    s_min: float = 1e-6
    cosmological_constant: float = 0.0
    paper_sign: bool = False
    probe_position: tuple = (1.0, 1.0, 1.0)
    probe_direction: int = 1
    collapse_order: int | None = None

    def __post_init__(self):
        if self.scale is None:
            self.scale = power_law(2.0 / 3.0)
        self.validate()

    def validate(self):
        if self.kappa not in (-1, 0, 1):
            raise ConfigError(f"kappa must be -1, 0 or 1, got {self.kappa!r}")
        if self.scale.n != 1:
            raise ConfigError("scale factor must be an expression in x1 (time) only")
        if self.order < 1:
            raise ConfigError(f"order must be at least 1, got {self.order}")
        if not (self.t_end > 0 and self.t_start > self.t_end):
            raise ConfigError("need t_start > t_end > 0")
        if not 0 < self.ratio < 1:
            raise ConfigError("ratio must lie in (0, 1)")
        if self.s_min <= 0:
            raise ConfigError("s_min must be positive")
        if len(self.probe_position) != 3:
            raise ConfigError("probe_position needs three spatial coordinates")
        if not 1 <= self.probe_direction <= 4:
            raise ConfigError("probe_direction must be a generator index in 1..4")
        k0 = self.collapse_start
        if not 0 <= k0 <= self.order:
            raise ConfigError(f"collapse_order must lie in 0..{self.order}")

    @property
    def collapse_start(self) -> int:
        return self.order if self.collapse_order is None else self.collapse_order

    @property
    def convention(self) -> Convention:
        return Convention(1 if self.paper_sign else -1, self.cosmological_constant)

    @classmethod
    def from_mapping(cls, data: dict) -> "RwflConfig":
        known = {"kappa", "scale", "order", "t_start", "t_end", "ratio", "s_min",
                 "lambda", "paper_sign", "probe_position", "probe_direction", "collapse_order"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        kwargs = {}
        scale = data.get("scale")
        if scale is not None:
            if not isinstance(scale, dict) or len(scale) != 1:
                raise ConfigError("scale must be a table with exactly one of 'power' or 'expr'")
            if "power" in scale:
                kwargs["scale"] = power_law(float(scale["power"]))
            elif "expr" in scale:
                try:
                    kwargs["scale"] = parse(str(scale["expr"]), 1)
                except ValueError as exc:
                    raise ConfigError(f"bad scale expression: {exc}") from exc
            else:
                raise ConfigError("scale must set 'power' or 'expr'")
        for key in ("kappa", "order", "probe_direction", "collapse_order"):
            if key in data:
                kwargs[key] = int(data[key])
        for key in ("t_start", "t_end", "ratio", "s_min"):
            if key in data:
                kwargs[key] = float(data[key])
        if "lambda" in data:
            kwargs["cosmological_constant"] = float(data["lambda"])
        if "paper_sign" in data:
            kwargs["paper_sign"] = bool(data["paper_sign"])
        if "probe_position" in data:
            kwargs["probe_position"] = tuple(float(x) for x in data["probe_position"])
        return cls(**kwargs)


@dataclass
class EvolutionRecord:
    t: float
    S: float
    Sdot: float
    phase: str
    k: int
    scalar: WeilElement | None = None
    kretschmann: WeilElement | None = None
    density: float | None = None
    pressure: float | None = None
    # same invariants computed at the plain evaluation ev_p
    classical: dict = field(default_factory=dict, repr=False)

    def csv_row(self) -> str:
        def num(x):
            return "" if x is None else repr(float(x))

        def coeff(w, j):
            return "" if w is None or w.order < j else repr(float(w.coeffs[j]))

        return ",".join([
            num(self.t), num(self.S), num(self.Sdot),
            coeff(self.scalar, 0), coeff(self.scalar, 1),
            coeff(self.kretschmann, 0), coeff(self.kretschmann, 1),
            num(self.density), num(self.pressure), self.phase, str(self.k),
        ])


def time_grid(cfg: RwflConfig) -> list[float]:
    """Geometric grid from ``t_start`` to ``t_end``; the last step may be shorter."""
    steps = int(math.floor(math.log(cfg.t_end / cfg.t_start) / math.log(cfg.ratio) + 1e-9))
    grid = [cfg.t_start * cfg.ratio**i for i in range(steps + 1)]
    if grid[-1] > cfg.t_end * (1.0 + 1e-9):
        grid.append(cfg.t_end)
    return grid


def monad_collapse(order: int, center: WeilPoint | None = None) -> list[tuple[int, Monad, int]]:
    """``(k, M_k(center), dim D_k)`` for ``k = order, ..., 0``.

    ``dim D_k = k`` counts the nilpotent basis ``eps, ..., eps^k`` of the
    stage ``R[eps]/(eps^(k+1))``.  Without an explicit centre the monads sit
    at ``ev_*`` in the one-generator time chart at ``t_* = 0``.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    if center is None:
        center = WeilPoint.evaluation([0.0], order)
    return [(k, Monad(center, k), k) for k in range(order, -1, -1)]


class _Probe:
    def __init__(self, cfg: RwflConfig):
        self.cfg = cfg
        self.metric = rwfl_metric(cfg.kappa, cfg.scale)
        self.S = cfg.scale
        self.Sdot = partial(cfg.scale, 1)

    def point(self, t: float) -> WeilPoint:
        base = (t,) + tuple(self.cfg.probe_position)
        return WeilPoint.probe(base, self.cfg.order, self.cfg.probe_direction)

    def record(self, t: float) -> EvolutionRecord:
        cfg = self.cfg
        conv = cfg.convention
        rho = self.point(t)
        geo = LiftedGeometry(self.metric, rho)
        ref = LiftedGeometry(self.metric, WeilPoint.evaluation(rho.base, 0))
        density, pressure = _fluid(geo, conv)
        ref_density, ref_pressure = _fluid(ref, conv)
        return EvolutionRecord(
            t=t,
            S=eval_real(self.S, [t]),
            Sdot=eval_real(self.Sdot, [t]),
            phase=MACROSCOPIC,
            k=cfg.order,
            scalar=geo.scalar,
            kretschmann=geo.kretschmann,
            density=density,
            pressure=pressure,
            classical={
                "scalar": ref.scalar.real,
                "kretschmann": ref.kretschmann.real,
                "density": ref_density,
                "pressure": ref_pressure,
            },
        )


def _fluid(geo: LiftedGeometry, conv: Convention) -> tuple[float, float]:
    T = geo.effective_stress(conv).real()
    g = geo.metric.real()
    return float(T[0, 0]), float(T[1, 1] / g[1, 1])


def iter_evolution(cfg: RwflConfig) -> Iterator[EvolutionRecord]:
    probe = _Probe(cfg)
    for t in time_grid(cfg):
        S = eval_real(probe.S, [t])
        if S <= cfg.s_min:
            Sdot = eval_real(probe.Sdot, [t])
            for k, _monad, _dim in monad_collapse(cfg.collapse_start):
                yield EvolutionRecord(t=t, S=S, Sdot=Sdot, phase=COLLAPSE, k=k)
            return
        yield probe.record(t)


def evolve_backwards(cfg: RwflConfig) -> list[EvolutionRecord]:
    """Records in descending time, followed by the collapse records if ``S`` reaches ``s_min``."""
    return list(iter_evolution(cfg))


def friedmann_report(cfg: RwflConfig) -> list[tuple[float, float, float]]:
    """``(t, density, pressure)`` for every macroscopic record."""
    return [
        (r.t, r.density, r.pressure)
        for r in evolve_backwards(cfg)
        if r.phase == MACROSCOPIC
    ]


def records_to_csv(records: Sequence[EvolutionRecord]) -> str:
    return "\n".join([CSV_HEADER] + [r.csv_row() for r in records]) + "\n"


def loglog_slope(ts: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of ``log|value|`` against ``log t``."""
    x = np.log(np.asarray(ts, dtype=float))
    y = np.log(np.abs(np.asarray(values, dtype=float)))
    return float(np.polyfit(x, y, 1)[0])
