"""Command-line entry point: ``weilgeom {jet,space,curvature,rwfl} ...``.

Exit codes: 0 success, 1 usage, 2 configuration, 3 numerical domain, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

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
from .functorial_space import INF, WeilPoint, monad_contains, qdist
from .jet_geometry import Convention, LiftedGeometry, MetricSpec
from .rwfl_model import CSV_HEADER, RwflConfig, evolve_backwards, monad_collapse, records_to_csv
from .smooth_expr import parse
from .weil_algebra import TAU_NIL, WeilElement, lift_expr

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

GRAMMAR = """\
expression grammar (whitespace is insignificant):
  expr    := term (("+" | "-") term)*
  term    := unary (("*" | "/") unary)*
  unary   := "-" unary | power
  power   := primary ("^" ["-"] INTEGER)*
  primary := NUMBER | VARIABLE | NAME "(" expr ")" | "(" expr ")"
  VARIABLE is x1 .. x999; NAME is one of exp log sin cos tan sqrt atan
  tanh recip; NUMBER is a decimal literal with optional exponent.
  Powers take integer exponents only; use exp(q*log(x1)) for real q.
"""

EXIT_USAGE, EXIT_CONFIG, EXIT_DOMAIN, EXIT_IO = 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _global_flags(parser, suppress):
    default = argparse.SUPPRESS
    parser.add_argument("--output", default=default if suppress else "-",
                        help="output path, or - for standard output (default)")
    parser.add_argument("--format", choices=("json", "csv"), default=default if suppress else None,
                        help="output format (each command has a natural default)")
    parser.add_argument("--tolerance", type=float, default=default if suppress else TAU_NIL,
                        help="nilpotency / invertibility threshold on real parts")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    parser = _Parser(prog="weilgeom", description=__doc__, epilog=GRAMMAR, formatter_class=fmt)
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    jet = sub.add_parser("jet", help="Weil-algebra evaluation", epilog=GRAMMAR, formatter_class=fmt)
    jet_sub = jet.add_subparsers(dest="action", required=True, parser_class=_Parser)
    ev = jet_sub.add_parser("eval", help="lift an expression to R[eps]/(eps^(K+1))",
                            epilog=GRAMMAR, formatter_class=fmt)
    ev.add_argument("--order", type=int, required=True)
    ev.add_argument("--expr", required=True)
    ev.add_argument("--at", required=True, help="comma-separated reals; use --at=-1,2 for negatives")
    ev.add_argument("--seed", type=int, help="1-based generator that receives + eps")
    _global_flags(ev, suppress=True)

    space = sub.add_parser("space", help="neighbour calculus on Weil points")
    space_sub = space.add_subparsers(dest="action", required=True, parser_class=_Parser)
    qd = space_sub.add_parser("qdist", help="quasi-distance of two points")
    qd.add_argument("--point-a", required=True, help="WeilPoint JSON, or a path to a JSON file")
    qd.add_argument("--point-b", required=True, help="WeilPoint JSON, or a path to a JSON file")
    _global_flags(qd, suppress=True)

    curv = sub.add_parser("curvature", help="lifted curvature chain of a metric",
                          epilog=GRAMMAR, formatter_class=fmt)
    curv.add_argument("--metric", required=True, help='JSON file {"dim": n, "components": [[...]]}')
    curv.add_argument("--at", required=True, help="WeilPoint JSON, or a path to a JSON file")
    curv.add_argument("--order", type=int)
    curv.add_argument("--paper-sign", action="store_true", help="use +1/2 R g in the Einstein tensor")
    curv.add_argument("--lambda", dest="lambda_", type=float, default=None)
    _global_flags(curv, suppress=True)

    rw = sub.add_parser("rwfl", help="Robertson-Walker scenario")
    rw_sub = rw.add_subparsers(dest="action", required=True, parser_class=_Parser)
    evo = rw_sub.add_parser("evolve", help="backward evolution to the singularity")
    evo.add_argument("--config", required=True, help="TOML configuration file")
    evo.add_argument("--order", type=int)
    evo.add_argument("--paper-sign", action="store_true", default=None)
    evo.add_argument("--lambda", dest="lambda_", type=float, default=None)
    _global_flags(evo, suppress=True)
    col = rw_sub.add_parser("collapse", help="monad-collapse schedule at the singular point")
    col.add_argument("--order", type=int, required=True)
    _global_flags(col, suppress=True)
    return parser


# --------------------------------------------------------------------------
# helpers


def _load_json_arg(text: str):
    if os.path.exists(text):
        try:
            with open(text, encoding="utf-8") as fh:
                return json.load(fh)
        except OSError as exc:
            raise OSError(f"cannot read {text}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON and not an existing file: {text!r}") from exc


def _point_from(data, order=None) -> WeilPoint:
    try:
        return WeilPoint.from_json(data, order)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad WeilPoint JSON: {exc}") from exc


def _point(text: str, order=None) -> WeilPoint:
    return _point_from(_load_json_arg(text), order)


def _stated_order(data):
    try:
        disp = data.get("displacement")
        return int(disp[0]["order"]) if disp else None
    except (AttributeError, KeyError, TypeError, ValueError, IndexError):
        return None


def _check_order(order):
    if order is not None and order < 0:
        raise UsageError("--order must be non-negative")


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=False) + "\n"


def write_output(text: str, path: str):
    """Write atomically (temp file + rename) or stream to stdout for ``-``."""
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".weilgeom-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --------------------------------------------------------------------------
# commands


def cmd_jet_eval(args) -> str:
    _check_order(args.order)
    try:
        at = [float(x) for x in args.at.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"--at must be comma-separated reals: {exc}") from exc
    f = parse(args.expr, len(at))
    K = args.order
    xs = [WeilElement.from_real(p, K) for p in at]
    if args.seed is not None:
        if not 1 <= args.seed <= len(at):
            raise ConfigError(f"--seed must lie in 1..{len(at)}")
        xs[args.seed - 1] = xs[args.seed - 1] + WeilElement.epsilon(K)
    result = lift_expr(f, xs).to_json()
    if args.format == "csv":
        return "degree,coeff\n" + "".join(f"{j},{c!r}\n" for j, c in enumerate(result["coeffs"]))
    return _dumps(result)


def cmd_space_qdist(args) -> str:
    raw_a, raw_b = _load_json_arg(args.point_a), _load_json_arg(args.point_b)
    # a bare {"base": ...} adopts the stage of the other point
    orders = [_stated_order(raw) for raw in (raw_a, raw_b)]
    order = next((o for o in orders if o is not None), None)
    a = _point_from(raw_a, order)
    b = _point_from(raw_b, order)
    d = qdist(a, b, args.tolerance)
    value = "inf" if d == INF else int(d)
    if args.format == "csv":
        return f"qdist\n{value}\n"
    return _dumps(value)


def cmd_curvature(args) -> str:
    _check_order(args.order)
    data = _load_json_arg(args.metric)
    try:
        g = MetricSpec.from_json(data)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad metric JSON: {exc}") from exc
    rho = _point(args.at, args.order)
    conv = Convention(1 if args.paper_sign else -1, args.lambda_ or 0.0)
    report = LiftedGeometry(g, rho, args.tolerance).report(conv)
    if args.format == "csv":
        raise ConfigError("curvature output is JSON only")
    return _dumps(report)


def _load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc


def cmd_rwfl_evolve(args) -> str:
    _check_order(args.order)
    data = _load_config(args.config)
    # flags override the config file
    if args.order is not None:
        data["order"] = args.order
    if args.paper_sign is not None:
        data["paper_sign"] = args.paper_sign
    if args.lambda_ is not None:
        data["lambda"] = args.lambda_
    try:
        cfg = RwflConfig.from_mapping(data)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    records = evolve_backwards(cfg)
    if args.format == "json":
        keys = CSV_HEADER.split(",")
        return _dumps([dict(zip(keys, r.csv_row().split(","))) for r in records])
    return records_to_csv(records)


def cmd_rwfl_collapse(args) -> str:
    _check_order(args.order)
    schedule = monad_collapse(args.order)
    rows = []
    for idx, (k, monad, dim) in enumerate(schedule):
        nested = True
        if idx + 1 < len(schedule):
            inner = schedule[idx + 1][1]
            nested = _nested_on_basis(monad, inner, args.tolerance)
        rows.append({"k": k, "dim": dim, "nested": nested})
    if args.format == "json":
        return _dumps(rows)
    body = "".join(f"{r['k']},{r['dim']},{str(r['nested']).lower()}\n" for r in rows)
    return "k,dim,nested\n" + body


def _nested_on_basis(outer, inner, tol) -> bool:
    """Check ``inner <= outer`` on the points ``center + eps^j``, j = 0..K."""
    center = outer.center
    K = center.order
    for j in range(K + 1):
        disp = [d + WeilElement.epsilon(K, j) if j else d for d in center.displacement]
        sigma = WeilPoint(center.base, disp, K)
        if monad_contains(inner, sigma, tol) and not monad_contains(outer, sigma, tol):
            return False
    return True


COMMANDS = {
    ("jet", "eval"): cmd_jet_eval,
    ("space", "qdist"): cmd_space_qdist,
    ("curvature", None): cmd_curvature,
    ("rwfl", "evolve"): cmd_rwfl_evolve,
    ("rwfl", "collapse"): cmd_rwfl_collapse,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = COMMANDS[(args.command, getattr(args, "action", None))]
        text = handler(args)
        write_output(text, args.output)
    except UsageError as exc:
        print(f"weilgeom: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, ParseError, ArityError, OrderMismatch, NotNilpotent) as exc:
        print(f"weilgeom: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, NotInvertible, SingularMetric, ArithmeticError) as exc:
        print(f"weilgeom: numerical domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"weilgeom: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (WeilGeomError, ValueError) as exc:
        print(f"weilgeom: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
