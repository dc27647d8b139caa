"""Jet arithmetic in R[eps]/(eps^(K+1)), infinitesimal neighbour calculus and
lifted curvature, with a Robertson-Walker singularity scenario."""

from .errors import (
    ArityError,
    ConfigError,
    DomainError,
    NotInvertible,
    NotNilpotent,
    OrderMismatch,
    ParseError,
    SingularMetric,
    WeilGeomError,
)
from .functorial_space import (
    INF,
    Monad,
    WeilPoint,
    apply_derivation,
    evaluate,
    monad_contains,
    neighbour,
    pushforward,
    qdist,
)
from .jet_geometry import (
    Convention,
    LiftedGeometry,
    MetricSpec,
    TensorValue,
    christoffel,
    einstein_tensor,
    effective_stress,
    inverse_metric,
    kretschmann,
    metric_at,
    project_real,
    ricci,
    riemann,
    scalar_curvature,
)
from .rwfl_model import (
    EvolutionRecord,
    RwflConfig,
    evolve_backwards,
    friedmann_report,
    monad_collapse,
    rwfl_metric,
)
from .smooth_expr import SmoothExpr, compose, eval_real, parse, partial, to_string
from .weil_algebra import (
    WeilElement,
    invert,
    lift_expr,
    nilpotency_index,
    nilpotent_part,
    real_part,
    truncate,
)

__version__ = "0.1.0"
