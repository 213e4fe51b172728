#!/usr/bin/env python3
"""
Command-line surface for halfspace-liouville.

Every subcommand writes one JSON report (stdout or --out) and a one-line
status to stderr. Exit codes: 0 when every check passes, 1 when a
verification check fails (the report is still written), 2 on invalid input.
"""

import argparse
import logging
import math
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .config import get_section
from .cones import (
    MU_BISECTION_TOL,
    check_conditions,
    cone_constants,
    cone_status,
    h1_holds,
    h2_holds,
    nonexistence_applies,
    parse_cone,
    parse_symfunc,
)
from .exceptions import (
    ConformalError,
    FitError,
    IntegrationError,
    InversionError,
    StartingRadiusError,
)
from .fields import METHODS, BubbleField, ScalarField, jet, load_field_spec, make_field
from .grids import GridSpec, default_grid, load_grid
from .hessian import (
    CONVENTIONS,
    RICCI_DIRECTIONS,
    boundary_values,
    conformal_hessian,
    eigen_residual,
    eigenvalues,
    hessian_eigenvalues,
    ricci_transform,
)
from .liouville import (
    COMPARISON_TOL,
    COUNTEREXAMPLE_KINDS,
    LAM_TOL,
    RIGIDITY_TOL,
    BubbleParams,
    counterexample,
    find_critical_lambda,
    kelvin_gap,
    residual,
    rigidity_check,
    sphere_comparison,
    starter_liminf_proxy,
)
from .mobius import load_map, mobius_apply, pushforward, random_map
from .ode import (
    ATOL,
    BLOWUP,
    DRIFT_TOL,
    GLOBAL,
    RTOL,
    THRESHOLD_BAND,
    OdeParams,
    OdeState,
    convexity_check,
    expected_classification,
    first_integral,
    integrate_general,
    integrate_model,
    threshold_v0_bound,
    threshold_w0,
)
from .points import is_infinity, parse_point
from .reports import build_report, dumps_report, write_json, write_svg, write_trajectory

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2

COMMANDS = (
    "eig",
    "invariance",
    "cone",
    "conditions",
    "ode",
    "threshold",
    "spheres",
    "rigidity",
    "counterexample",
    "residual",
    "ricci",
)

# failures of a numerical procedure rather than of the input
RUNTIME_ERRORS = (IntegrationError, InversionError, FitError, StartingRadiusError)

_CLI = get_section("cli")
INVARIANCE_TOL_ANALYTIC = float(_CLI["invariance_tol_analytic"])
INVARIANCE_TOL_FD = float(_CLI["invariance_tol_fd"])
EIGEN_RESIDUAL_TOL = float(_CLI["eigen_residual_tol"])
RIGIDITY_RADIUS_TOL = float(_CLI["rigidity_radius_tol"])
RIGIDITY_KELVIN_TOL = float(_CLI["rigidity_kelvin_tol"])

Result = Tuple[Dict[str, Any], bool]


# ----------------------------------------------------------------------------
# Argument helpers
# ----------------------------------------------------------------------------


def _parse_floats(text: str) -> List[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got '{text}'") from e


def _load_field(path: str) -> ScalarField:
    return make_field(load_field_spec(path))


def _load_grid(args: argparse.Namespace, n: int) -> GridSpec:
    if args.grid:
        grid = load_grid(args.grid)
        if grid.n != n:
            raise ConformalError(f"grid dimension {grid.n} does not match n={n}")
        return grid
    return default_grid(n, seed=args.seed)


def _boundary_c(args: argparse.Namespace, required: bool = True) -> Optional[float]:
    """Neumann datum c from --c, or c = -h from the mean curvature --h."""
    if args.c is not None:
        return float(args.c)
    if args.h is not None:
        return -float(args.h)
    if required:
        raise ConformalError("one of --c (Neumann) or --h (mean curvature) is required")
    return None


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{name.replace('_', '-')}" for name in names if getattr(args, name) is None]
    if missing:
        raise ConformalError(f"missing required option(s): {', '.join(missing)}")


def _field_dict(v: ScalarField) -> Optional[Dict[str, Any]]:
    return v.spec.to_dict() if v.spec else None


# ----------------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------------


def cmd_eig(args: argparse.Namespace) -> Result:
    v = _load_field(args.field)
    x = parse_point(args.point)
    j = jet(v, x, args.method)
    matrix = conformal_hessian(j)
    lams = eigenvalues(matrix)
    res = eigen_residual(matrix)
    tol = args.tol if args.tol is not None else EIGEN_RESIDUAL_TOL
    body: Dict[str, Any] = {
        "field": _field_dict(v),
        "point": x,
        "method": j.method,
        "eigenvalues": lams,
        "matrix": matrix,
        "eigen_residual": res,
        "tolerance": tol,
    }
    if args.cone:
        body["cone"] = args.cone
        body["cone_status"] = cone_status(parse_cone(args.cone, v.n), lams)
    if args.convention:
        body["boundary"] = {"convention": args.convention, "value": boundary_values(j, args.convention)}
    return body, res <= tol


def cmd_invariance(args: argparse.Namespace) -> Result:
    v = _load_field(args.field)
    n = v.n
    rng = np.random.default_rng(args.seed)
    fixed_map = load_map(args.map) if args.map else None
    fixed_point = parse_point(args.point) if args.point else None
    analytic = args.method == "analytic" and v.has_analytic_jet
    tol = args.tol if args.tol is not None else (
        INVARIANCE_TOL_ANALYTIC if analytic else INVARIANCE_TOL_FD
    )
    gaps: List[float] = []
    skipped = 0
    for _ in range(args.samples):
        phi = fixed_map if fixed_map is not None else random_map(n, rng)
        y = fixed_point if fixed_point is not None else rng.normal(size=n)
        pulled = pushforward(v, phi)
        image = mobius_apply(phi, y)
        if not pulled.contains(y) or is_infinity(image) or not v.contains(image):
            skipped += 1
            continue
        lhs = hessian_eigenvalues(jet(pulled, y, args.method))
        rhs = hessian_eigenvalues(jet(v, image, args.method))
        gaps.append(float(np.max(np.abs(lhs - rhs))) / max(1.0, float(np.max(np.abs(rhs)))))
    if not gaps:
        raise ConformalError("no sample point fell inside the domain of the transformed field")
    max_gap = max(gaps)
    body = {
        "field": _field_dict(v),
        "map": fixed_map.to_list() if fixed_map is not None else "random",
        "samples": len(gaps),
        "skipped": skipped,
        "max_relative_gap": max_gap,
        "method": "analytic" if analytic else "finite_difference",
        "tolerance": tol,
        "seed": args.seed,
    }
    return body, max_gap <= tol


def cmd_cone(args: argparse.Namespace) -> Result:
    _require(args, "cone")
    cone = parse_cone(args.cone, args.n)
    tol = args.tol if args.tol is not None else MU_BISECTION_TOL
    constants = cone_constants(cone, tol)
    body: Dict[str, Any] = {
        "cone": cone.name,
        "n": cone.n,
        "note": cone.note,
        "constants": constants.to_dict(),
        "tolerance": tol,
    }
    if args.lams:
        body["lams"] = args.lams
        body["status"] = cone_status(cone, args.lams)
    return body, constants.consistent


def cmd_conditions(args: argparse.Namespace) -> Result:
    _require(args, "f")
    cone = parse_cone(args.cone, args.n) if args.cone else None
    f = parse_symfunc(args.f, args.n, cone)
    report = check_conditions(f, f.cone, args.samples, args.seed)
    body: Dict[str, Any] = {"f": f.name, "cone": f.cone.name, "report": report.to_dict()}
    if args.p is not None:
        constants = cone_constants(f.cone)
        degree = report.homogeneity_degree
        body["mu_minus"] = constants.to_dict()["mu_minus"]
        body["h1"] = h1_holds(constants.mu_minus, args.p, degree)
        body["h2"] = h2_holds(constants.mu_minus, args.p, degree)
        c = _boundary_c(args, required=False)
        if c is not None:
            body["nonexistence_applies"] = nonexistence_applies(constants, c, args.p, degree)
    return body, report.min_partial > 0 and report.min_level_norm > 0


def cmd_ode(args: argparse.Namespace) -> Result:
    rtol = args.rtol if args.rtol is not None else RTOL
    atol = args.atol if args.atol is not None else ATOL
    checks: Dict[str, Any] = {}
    passed = True
    if args.f:
        _require(args, "p")
        cone = parse_cone(args.cone, args.n) if args.cone else None
        f = parse_symfunc(args.f, args.n, cone)
        c = _boundary_c(args)
        params = OdeParams(args.mu, args.p) if args.mu is not None else None
        traj = integrate_general(f, f.cone, args.p, c, args.v0, args.tmax, rtol, atol, params)
        mu = args.mu if args.mu is not None else cone_constants(f.cone).mu_minus
    else:
        _require(args, "mu", "p", "w0")
        params = OdeParams(args.mu, args.p)
        traj = integrate_model(params, args.v0, args.w0, args.tmax, rtol, atol)
        mu = args.mu
        i0 = first_integral(params, OdeState(0.0, math.exp(args.v0), args.w0))
        expected = expected_classification(params, args.v0, args.w0)
        decidable = abs(i0) > THRESHOLD_BAND
        checks["expected_classification"] = expected
        checks["near_separatrix"] = not decidable
        if decidable:
            passed = traj.classification == expected
    if traj.drift is not None:
        tol = args.tol if args.tol is not None else DRIFT_TOL
        checks["drift_tolerance"] = tol
        passed = passed and traj.max_drift <= tol
    if args.convexity:
        if not math.isfinite(mu):
            raise ConformalError("convexity check needs a finite mu (pass --mu)")
        checks["convexity"] = convexity_check(mu, traj).to_dict()
    body = {**traj.to_dict(), "checks": checks}
    if args.svg:
        write_svg(args.svg, traj)
        body["svg"] = args.svg
    if args.out and args.out.endswith(".csv"):
        write_trajectory(args.out, traj, {"checks": checks, "pass": passed}, timestamp=not args.no_timestamp)
        body["csv"] = args.out
    return body, passed


def cmd_threshold(args: argparse.Namespace) -> Result:
    _require(args, "mu", "p")
    w = threshold_w0(args.mu, args.p, args.v0)
    body: Dict[str, Any] = {"mu": args.mu, "p": args.p, "v0": args.v0, "threshold_w0": w}
    c = _boundary_c(args, required=False)
    if c is not None:
        body["c"] = c
        body["v0_bound"] = threshold_v0_bound(args.mu, args.p, c)
    passed = True
    if args.verify:
        params = OdeParams(args.mu, args.p)
        sweep = []
        for factor in (0.90, 0.95, 1.05, 1.10):
            traj = integrate_model(params, args.v0, factor * w, args.tmax)
            expected = BLOWUP if factor < 1 else GLOBAL
            sweep.append({"factor": factor, "w0": factor * w, "classification": traj.classification,
                          "expected": expected})
            passed = passed and traj.classification == expected
        body["sweep"] = sweep
        body["t_max"] = args.tmax
    return body, passed


def cmd_spheres(args: argparse.Namespace) -> Result:
    v = _load_field(args.field)
    grid = _load_grid(args, v.n)
    centers = [parse_point(x) for x in args.x] if args.x else [np.zeros(v.n)]
    body: Dict[str, Any] = {"field": _field_dict(v), "grid": grid.to_dict(), "seed": grid.seed}
    if args.lam is not None:
        minima = [sphere_comparison(v, x, args.lam, grid.excluding(x, args.lam)) for x in centers]
        body.update({"lam": args.lam, "comparison_min": minima, "tolerance": COMPARISON_TOL})
        return body, all(m >= -COMPARISON_TOL for m in minima)

    tol = args.tol if args.tol is not None else LAM_TOL
    radii = [find_critical_lambda(v, x, grid, tol) for x in centers]
    unbounded = [r.unbounded for r in radii]
    verdict = "unbounded" if all(unbounded) else ("finite" if not any(unbounded) else "mixed")
    body.update({"radii": [r.to_dict() for r in radii], "verdict": verdict, "tolerance": tol})
    passed = verdict != "mixed"
    if isinstance(v, BubbleField):
        params = BubbleParams(v.a, v.b, tuple(float(c) for c in v.xbar))
        closed = []
        for x, r in zip(centers, radii):
            expected = params.critical_radius(x)
            gap = kelvin_gap(v, x, r.value, grid) if not r.unbounded else math.inf
            closed.append({"closed_form": expected, "radius_gap": abs(r.value - expected), "kelvin_gap": gap})
            passed = passed and abs(r.value - expected) <= RIGIDITY_RADIUS_TOL and gap <= RIGIDITY_KELVIN_TOL
        body["bubble"] = closed
        body["starter"] = starter_liminf_proxy(v).to_dict()
    return body, passed


def cmd_rigidity(args: argparse.Namespace) -> Result:
    _require(args, "f")
    v = _load_field(args.field)
    cone = parse_cone(args.cone, v.n) if args.cone else None
    f = parse_symfunc(args.f, v.n, cone)
    grid = _load_grid(args, v.n)
    tol = args.tol if args.tol is not None else RIGIDITY_TOL
    report = rigidity_check(v, f, f.cone, _boundary_c(args), grid, tol)
    body = {"field": _field_dict(v), "cone": f.cone.name, "grid": grid.to_dict(), "seed": grid.seed}
    body.update(report.to_dict())
    return body, report.passed


def cmd_counterexample(args: argparse.Namespace) -> Result:
    _require(args, "kind")
    params: Dict[str, Any] = {}
    for name in ("alpha", "mu", "delta", "eps", "radius"):
        value = getattr(args, name)
        if value is not None:
            params[name] = value
    c = _boundary_c(args, required=False)
    if c is not None:
        params["c"] = c
    if args.delta_tilde is not None:
        params["delta_tilde"] = args.delta_tilde
    if args.cone:
        params["cone"] = args.cone
    grid = load_grid(args.grid) if args.grid else None
    result = counterexample(args.kind, args.n, params, grid, args.seed)
    return result.to_dict(), result.report.passed


def cmd_residual(args: argparse.Namespace) -> Result:
    _require(args, "f")
    v = _load_field(args.field)
    cone = parse_cone(args.cone, v.n) if args.cone else None
    f = parse_symfunc(args.f, v.n, cone)
    grid = _load_grid(args, v.n)
    p = args.p if args.p is not None else 0.0
    report = residual(v, f, f.cone, p, _boundary_c(args), grid, args.method, args.tol)
    body = {"field": _field_dict(v), "f": f.name, "cone": f.cone.name, "p": p}
    body.update(report.to_dict())
    return body, report.passed


def cmd_ricci(args: argparse.Namespace) -> Result:
    _require(args, "lams")
    out = ricci_transform(args.lams, args.direction)
    back_direction = [d for d in RICCI_DIRECTIONS if d != args.direction][0]
    back = ricci_transform(out, back_direction)
    original = np.sort(np.asarray(args.lams, float))[::-1]
    gap = float(np.max(np.abs(back - original)))
    tol = args.tol if args.tol is not None else 1e-12
    body = {
        "lams": args.lams,
        "direction": args.direction,
        "result": out,
        "round_trip_gap": gap,
        "tolerance": tol,
    }
    return body, gap <= tol * max(1.0, float(np.max(np.abs(original))))


HANDLERS: Dict[str, Callable[[argparse.Namespace], Result]] = {
    "eig": cmd_eig,
    "invariance": cmd_invariance,
    "cone": cmd_cone,
    "conditions": cmd_conditions,
    "ode": cmd_ode,
    "threshold": cmd_threshold,
    "spheres": cmd_spheres,
    "rigidity": cmd_rigidity,
    "counterexample": cmd_counterexample,
    "residual": cmd_residual,
    "ricci": cmd_ricci,
}


# ----------------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------------


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--no-timestamp", action="store_true", help="omit generated_at from reports")
    common.add_argument("--tol", type=float, help="override the command's pass tolerance")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled checks (default 0)")
    common.add_argument("--verbose", action="store_true", help="debug logging on stderr")
    return common


def _add_boundary(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--c", type=float, help="Neumann datum: dv/dx_n = c e^v")
    group.add_argument("--h", type=float, help="boundary mean curvature h = -c")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="halfspace-liouville",
        description="Numerics for conformally invariant equations on the half space.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()

    p = sub.add_parser("eig", parents=[common], help="eigenvalues of A[v] at a point")
    p.add_argument("--field", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--method", choices=METHODS, default="analytic")
    p.add_argument("--cone")
    p.add_argument("--convention", choices=CONVENTIONS,
                   help="report the boundary datum under this sign convention")

    p = sub.add_parser("invariance", parents=[common], help="Mobius invariance of the spectrum")
    p.add_argument("--field", required=True)
    p.add_argument("--map", help="JSON map file; random maps when omitted")
    p.add_argument("--point")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--method", choices=METHODS, default="analytic")

    p = sub.add_parser("cone", parents=[common], help="mu^-, lambda* and e_n flags of a cone")
    p.add_argument("--cone")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--lams", type=_parse_floats)

    p = sub.add_parser("conditions", parents=[common], help="sampled structure conditions on (f, cone)")
    p.add_argument("--f")
    p.add_argument("--cone")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--p", type=float)
    _add_boundary(p)

    p = sub.add_parser("ode", parents=[common], help="integrate the one-variable equation")
    p.add_argument("--f", help="operator for the general integrator; the model ODE when omitted")
    p.add_argument("--cone")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--mu", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--v0", type=float, default=0.0)
    p.add_argument("--w0", type=float)
    p.add_argument("--tmax", type=float, default=50.0)
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--convexity", action="store_true")
    p.add_argument("--svg", help="also write an SVG polyline of (t, v)")
    _add_boundary(p)

    p = sub.add_parser("threshold", parents=[common], help="global-existence threshold for w0")
    p.add_argument("--mu", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--v0", type=float, default=0.0)
    p.add_argument("--verify", action="store_true", help="integrate at 0.90..1.10 x threshold")
    p.add_argument("--tmax", type=float, default=200.0)
    _add_boundary(p)

    p = sub.add_parser("spheres", parents=[common], help="moving-spheres comparison and critical radius")
    p.add_argument("--field", required=True)
    p.add_argument("--x", action="append", help="boundary center (repeatable); default the origin")
    p.add_argument("--lam", type=float)
    p.add_argument("--grid")

    p = sub.add_parser("rigidity", parents=[common], help="bubble fit and f(2a^-2 b e) = 1")
    p.add_argument("--field", required=True)
    p.add_argument("--f")
    p.add_argument("--cone")
    p.add_argument("--grid")
    _add_boundary(p)

    p = sub.add_parser("counterexample", parents=[common], help="verify a catalog counterexample")
    p.add_argument("--kind", choices=COUNTEREXAMPLE_KINDS)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--alpha", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--delta-tilde", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--radius", type=float)
    p.add_argument("--cone")
    p.add_argument("--grid")
    _add_boundary(p)

    p = sub.add_parser("residual", parents=[common], help="grid residuals of the boundary problem")
    p.add_argument("--field", required=True)
    p.add_argument("--f")
    p.add_argument("--cone")
    p.add_argument("--p", type=float)
    p.add_argument("--grid")
    p.add_argument("--method", choices=METHODS, default="analytic")
    _add_boundary(p)

    p = sub.add_parser("ricci", parents=[common], help="Schouten <-> Ricci eigenvalue map")
    p.add_argument("--lams", type=_parse_floats)
    p.add_argument("--direction", choices=RICCI_DIRECTIONS, default="schouten_to_ricci")

    return parser


def _emit(args: argparse.Namespace, report: Dict[str, Any]) -> None:
    text = dumps_report(report)
    if args.out and not args.out.endswith(".csv"):
        write_json(args.out, report)
    elif args.out:
        return
    else:
        sys.stdout.write(text)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_INVALID

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )

    try:
        body, passed = HANDLERS[args.command](args)
    except RUNTIME_ERRORS as e:
        print(f"❌ {args.command}: {e}", file=sys.stderr)
        return EXIT_FAILED
    except (ConformalError, OSError) as e:
        print(f"❌ {args.command}: {e}", file=sys.stderr)
        return EXIT_INVALID

    body["pass"] = passed
    report = build_report(args.command, body, timestamp=not args.no_timestamp)
    try:
        _emit(args, report)
    except OSError as e:
        print(f"❌ {args.command}: cannot write report: {e}", file=sys.stderr)
        return EXIT_INVALID

    if passed:
        print(f"✅ {args.command}: all checks passed", file=sys.stderr)
        return EXIT_OK
    print(f"❌ {args.command}: verification failed (see report)", file=sys.stderr)
    return EXIT_FAILED


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
