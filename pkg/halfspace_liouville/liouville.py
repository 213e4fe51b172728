"""
Moving-spheres harness, bubble recovery, rigidity and residual checks, and
the catalog of counterexample fields.

Every certificate here is a grid minimum or maximum: it can falsify a
claim about a field but never prove one.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import get_section
from .cones import (
    EXTERIOR,
    MEMBERSHIP_TOL,
    Cone,
    SymFunc,
    cone_constants,
    cone_margin,
    cone_status,
    f_eval,
    format_mu,
    lambda_star,
    make_symfunc,
    parse_cone,
    weitzenbock_bubble_constants,
)
from .exceptions import (
    DomainError,
    FitError,
    InputError,
    ParameterError,
    StartingRadiusError,
    StencilError,
)
from .fields import (
    BarrierField,
    BubbleField,
    FieldSpec,
    LogQuadraticField,
    ScalarField,
    jet,
    make_field,
)
from .grids import (
    GridSpec,
    annulus_samples,
    ball_samples,
    default_grid,
    hemisphere_directions,
)
from .hessian import boundary_values, hessian_eigenvalues, w_tensor, eigenvalues
from .mobius import kelvin
from .points import as_point, on_boundary

logger = logging.getLogger(__name__)

_LIOUVILLE = get_section("liouville")
LAM_MAX = float(_LIOUVILLE["lam_max"])
LAM_TOL = float(_LIOUVILLE["lam_tol"])
COMPARISON_TOL = float(_LIOUVILLE["comparison_tol"])
GRAZING_FACTOR = float(_LIOUVILLE["grazing_factor"])
RESIDUAL_TOL_ANALYTIC = float(_LIOUVILLE["residual_tol_analytic"])
RESIDUAL_TOL_FD = float(_LIOUVILLE["residual_tol_fd"])
RIGIDITY_TOL = float(_LIOUVILLE["rigidity_tol"])
FIT_TOL = float(_LIOUVILLE["fit_tol"])
SHELL_FACTORS = tuple(float(s) for s in _LIOUVILLE["shell_factors"])
STARTER_RADII = tuple(float(r) for r in _LIOUVILLE["starter_radii"])
COUNTEREXAMPLE_SAMPLES = int(_LIOUVILLE["counterexample_samples"])

COUNTEREXAMPLE_KINDS = ("log_power", "boundary_drift", "barrier", "xn_only", "aux_lemma23")

# tolerance on the direction of a log-power spectrum relative to its factor
DIRECTION_TOL = 1e-9


# ----------------------------------------------------------------------------
# Bubbles
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class BubbleParams:
    """v(x) = log(a / (1 + b|x - xbar|^2))."""

    a: float
    b: float
    xbar: Tuple[float, ...]

    def __post_init__(self) -> None:
        if not (self.a > 0 and self.b > 0):
            raise ParameterError(f"bubble needs a > 0 and b > 0, got a={self.a}, b={self.b}")

    @property
    def n(self) -> int:
        return len(self.xbar)

    def to_field(self) -> BubbleField:
        spec = FieldSpec("bubble", self.n, {"a": self.a, "b": self.b, "xbar": list(self.xbar)})
        return BubbleField(self.n, self.a, self.b, self.xbar, spec=spec)

    def spectrum_scale(self) -> float:
        """A[v] = 2 a^-2 b I."""
        return 2.0 * self.b / self.a**2

    def neumann_datum(self) -> float:
        return 2.0 * self.b * self.xbar[-1] / self.a

    def critical_radius(self, x: Sequence[float]) -> float:
        """Closed form lam_bar(x)^2 = (1 + b|x - xbar|^2) / b."""
        d = np.asarray(x, dtype=float) - np.asarray(self.xbar)
        return math.sqrt((1.0 + self.b * float(d @ d)) / self.b)

    def to_dict(self) -> Dict[str, Any]:
        return {"a": self.a, "b": self.b, "xbar": list(self.xbar)}


@dataclass
class BubbleFit:
    params: Optional[BubbleParams]
    residual: float
    is_bubble: bool
    coefficients: Dict[str, Any]
    sample_count: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "is_bubble": self.is_bubble,
            "params": self.params.to_dict() if self.params else None,
            "residual": self.residual,
            "coefficients": self.coefficients,
            "sample_count": self.sample_count,
        }


def bubble_fit(samples: Sequence[Tuple[Any, float]], tol: float = FIT_TOL) -> BubbleFit:
    """
    Least-squares fit of e^{-v} = alpha |x|^2 + beta . x + gamma.

    The bubble is xbar = -beta / (2 alpha), a = 1 / (gamma - alpha |xbar|^2),
    b = alpha a. ``residual`` is max |v - v_fit| when the coefficients define
    a bubble, otherwise the max residual of the quadratic fit of e^{-v}.
    A fit whose v residual exceeds ``tol`` is flagged as not a bubble.
    """
    if not samples:
        raise FitError("bubble fit needs samples")
    pts = np.array([as_point(p) for p, _ in samples])
    vals = np.array([float(v) for _, v in samples])
    m, n = pts.shape
    if m < n + 2:
        raise FitError(f"bubble fit needs at least {n + 2} samples, got {m}")

    design = np.column_stack([np.sum(pts * pts, axis=1), pts, np.ones(m)])
    target = np.exp(-vals)
    scale = np.linalg.norm(design, axis=0)
    scale[scale == 0.0] = 1.0
    coef, _, rank, _ = np.linalg.lstsq(design / scale, target, rcond=None)
    if rank < n + 2:
        raise FitError(f"bubble fit is rank deficient (rank {rank} < {n + 2})")
    coef = coef / scale
    alpha, beta, gamma = float(coef[0]), coef[1 : n + 1], float(coef[n + 1])
    linear_residual = float(np.max(np.abs(design @ coef - target)))
    coefficients = {"alpha": alpha, "beta": beta.tolist(), "gamma": gamma}

    params: Optional[BubbleParams] = None
    if alpha > 0:
        xbar = -beta / (2.0 * alpha)
        denom = gamma - alpha * float(xbar @ xbar)
        if denom > 0:
            a = 1.0 / denom
            params = BubbleParams(a, alpha * a, tuple(float(c) for c in xbar))
    if params is None:
        logger.info("bubble fit: coefficients do not define a bubble (alpha=%.3g)", alpha)
        return BubbleFit(None, linear_residual, False, coefficients, m)

    d = pts - np.asarray(params.xbar)
    fitted = math.log(params.a) - np.log1p(params.b * np.sum(d * d, axis=1))
    residual = float(np.max(np.abs(vals - fitted)))
    is_bubble = residual <= tol
    logger.info(
        "bubble fit: a=%.10g b=%.10g residual %.3e%s",
        params.a, params.b, residual, "" if is_bubble else " (not a bubble)",
    )
    return BubbleFit(params, residual, is_bubble, coefficients, m)


def field_samples(v: ScalarField, points: np.ndarray) -> List[Tuple[np.ndarray, float]]:
    """(x, v(x)) for the points inside v's domain."""
    return [(p, v.value(p)) for p in points if v.contains(p)]


def radial_bubble_params(v: ScalarField, tol: float = 1e-8) -> BubbleParams:
    """
    Bubble parameters of a radial solution from its 2-jet at the origin:
    a = e^{v(0)}, b = -v''(0)/2.
    """
    j = jet(v, np.zeros(v.n))
    if float(np.max(np.abs(j.gradient))) > tol:
        raise DomainError("field is not critical at the origin")
    second = float(np.mean(np.diag(j.hessian)))
    return BubbleParams(math.exp(j.value), -0.5 * second, (0.0,) * v.n)


# ----------------------------------------------------------------------------
# Moving spheres
# ----------------------------------------------------------------------------


def shell_points(
    center: np.ndarray,
    lam: float,
    directions: Optional[np.ndarray] = None,
    factors: Sequence[float] = SHELL_FACTORS,
) -> np.ndarray:
    """center + lam s w for hemisphere directions w and radius factors s >= 1."""
    if directions is None:
        directions = hemisphere_directions(center.size)
    return np.array([center + lam * s * w for s in factors for w in directions])


def _boundary_center(v: ScalarField, x: Any) -> np.ndarray:
    center = as_point(x, v.n)
    if not on_boundary(center):
        raise ParameterError(f"sphere center must lie on x_n = 0, got {center.tolist()}")
    return center


def _gap_extremes(v: ScalarField, other: ScalarField, points: np.ndarray) -> Tuple[float, float, int]:
    """(min, max) of v - other over points in both domains, and the count used."""
    lo, hi, used = math.inf, -math.inf, 0
    for p in points:
        if not (v.contains(p) and other.contains(p)):
            continue
        gap = v.value(p) - other.value(p)
        lo, hi, used = min(lo, gap), max(hi, gap), used + 1
    return lo, hi, used


def sphere_comparison(
    v: ScalarField,
    x: Any,
    lam: float,
    grid: GridSpec,
    shell: bool = True,
    directions: Optional[np.ndarray] = None,
) -> float:
    """
    min of v - v^{x,lam} over the grid points outside B_lam(x), plus shell
    points just outside the sphere. A nonnegative value certifies the
    comparison on the sampled set.
    """
    center = _boundary_center(v, x)
    vk = kelvin(v, center, lam)
    pts = grid.points()
    if len(pts) and np.any(np.linalg.norm(pts - center, axis=1) < lam * (1.0 - 1e-12)):
        raise InputError(f"grid overlaps B_{lam:g}({center.tolist()}); exclude the ball first")
    if shell:
        pts = np.vstack([pts, shell_points(center, lam, directions)]) if len(pts) else shell_points(
            center, lam, directions
        )
    lo, _, used = _gap_extremes(v, vk, pts)
    if used == 0:
        raise InputError("no grid point lies in the domains of v and its Kelvin transform")
    return lo


def fixed_sphere_gap(v: ScalarField, x: Any, lam: float, directions: Optional[np.ndarray] = None) -> float:
    """max |v - v^{x,lam}| on the sphere |y - x| = lam, which the Kelvin map fixes."""
    center = _boundary_center(v, x)
    vk = kelvin(v, center, lam)
    lo, hi, used = _gap_extremes(v, vk, shell_points(center, lam, directions, factors=(1.0,)))
    if used == 0:
        raise InputError("no sphere point lies in the domain of v")
    return max(abs(lo), abs(hi))


def kelvin_gap(v: ScalarField, x: Any, lam: float, grid: GridSpec) -> float:
    """max |v^{x,lam} - v| over grid points; zero for a bubble at its critical radius."""
    center = _boundary_center(v, x)
    lo, hi, used = _gap_extremes(v, kelvin(v, center, lam), grid.points())
    if used == 0:
        raise InputError("no grid point lies in the domains of v and its Kelvin transform")
    return max(abs(lo), abs(hi))


@dataclass
class CriticalRadius:
    center: Tuple[float, ...]
    value: float
    iterations: int
    grazing: bool = False
    bracket: Optional[Tuple[float, float]] = None

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.value)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "center": list(self.center),
            "lambda_bar": format_mu(self.value),
            "unbounded": self.unbounded,
            "iterations": self.iterations,
            "grazing": self.grazing,
            "bracket": list(self.bracket) if self.bracket else None,
        }


def find_critical_lambda(
    v: ScalarField,
    x: Any,
    grid: GridSpec,
    tol: float = LAM_TOL,
    lam_max: float = LAM_MAX,
) -> CriticalRadius:
    """
    Bisection on the sign of the sphere comparison over [tol, lam_max].

    Each trial radius drops B_lam(x) from the grid. The converged radius is
    re-checked at lam (1 -+ grazing factor) to flag near-tangent contact.
    """
    center = _boundary_center(v, x)

    def holds(lam: float) -> bool:
        return sphere_comparison(v, center, lam, grid.excluding(center, lam)) >= -COMPARISON_TOL

    if not holds(tol):
        raise StartingRadiusError(
            f"sphere comparison fails already at lam={tol:g} about {center.tolist()}"
        )
    if holds(lam_max):
        logger.info(
            "critical radius about %s is unbounded (comparison holds at %g)", center.tolist(), lam_max
        )
        return CriticalRadius(tuple(center.tolist()), math.inf, 0)

    lo, hi, iterations = tol, lam_max, 0
    while hi - lo > tol * max(1.0, lo):
        # geometric steps while the bracket spans decades
        mid = math.sqrt(lo * hi) if hi > 2.0 * lo else 0.5 * (lo + hi)
        if holds(mid):
            lo = mid
        else:
            hi = mid
        iterations += 1
        logger.debug("lambda bisection %d: [%.12g, %.12g]", iterations, lo, hi)
    lam_bar = 0.5 * (lo + hi)

    grazing = not holds(lam_bar * (1.0 - GRAZING_FACTOR)) or holds(lam_bar * (1.0 + GRAZING_FACTOR))
    if grazing:
        logger.warning("grazing contact near lambda=%.10g about %s", lam_bar, center.tolist())
    logger.info("critical radius about %s: %.12g (%d steps)", center.tolist(), lam_bar, iterations)
    return CriticalRadius(tuple(center.tolist()), lam_bar, iterations, grazing, (lo, hi))


def critical_lambda(
    v: ScalarField, x: Any, grid: GridSpec, tol: float = LAM_TOL, lam_max: float = LAM_MAX
) -> float:
    """lam_bar(x), or math.inf when the comparison holds up to lam_max."""
    return find_critical_lambda(v, x, grid, tol, lam_max).value


def critical_lambda_dichotomy(
    v: ScalarField, centers: Sequence[Any], grid: GridSpec, tol: float = LAM_TOL
) -> Dict[str, Any]:
    """Critical radii at several boundary centers; finite everywhere or unbounded everywhere."""
    radii = [find_critical_lambda(v, x, grid, tol) for x in centers]
    unbounded = [r.unbounded for r in radii]
    if all(unbounded):
        verdict = "unbounded"
    elif not any(unbounded):
        verdict = "finite"
    else:
        verdict = "mixed"
    return {"verdict": verdict, "radii": [r.to_dict() for r in radii]}


def bubble_critical_lambda(params: BubbleParams, x: Sequence[float]) -> float:
    return params.critical_radius(x)


@dataclass
class StarterReport:
    radii: List[float]
    minima: List[float]

    @property
    def bounded_below(self) -> bool:
        return all(math.isfinite(m) for m in self.minima)

    def to_dict(self) -> Dict[str, Any]:
        return {"radii": self.radii, "minima": self.minima, "bounded_below": self.bounded_below}


def starter_liminf_proxy(
    v: ScalarField, radii: Sequence[float] = STARTER_RADII, directions: Optional[np.ndarray] = None
) -> StarterReport:
    """Minimum of v^{0,1} over half spheres of shrinking radius about the origin."""
    vk = kelvin(v, np.zeros(v.n), 1.0)
    if directions is None:
        directions = hemisphere_directions(v.n)
    minima = []
    for r in radii:
        vals = [vk.value(r * w) for w in directions if vk.contains(r * w)]
        minima.append(min(vals) if vals else -math.inf)
    return StarterReport(list(radii), minima)


# ----------------------------------------------------------------------------
# Residuals and rigidity
# ----------------------------------------------------------------------------


@dataclass
class VerifyReport:
    """
    Grid residuals of f(lambda(A[v])) = e^{-pv}, dv/dx_n = c e^v and cone
    membership, plus named extra checks. Quantities that were not evaluated
    are None and do not affect ``passed``.
    """

    interior_residual_max: Optional[float] = None
    boundary_residual_max: Optional[float] = None
    cone_margin_min: Optional[float] = None
    tolerance: float = RESIDUAL_TOL_ANALYTIC
    method: str = "analytic"
    interior_points: int = 0
    boundary_points: int = 0
    skipped_points: int = 0
    grid: Optional[Dict[str, Any]] = None
    seed: Optional[int] = None
    checks: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    @property
    def interior_pass(self) -> Optional[bool]:
        if self.interior_residual_max is None:
            return None
        return self.interior_residual_max <= self.tolerance

    @property
    def boundary_pass(self) -> Optional[bool]:
        if self.boundary_residual_max is None:
            return None
        return self.boundary_residual_max <= self.tolerance

    @property
    def cone_pass(self) -> Optional[bool]:
        if self.cone_margin_min is None:
            return None
        return self.cone_margin_min >= -MEMBERSHIP_TOL

    @property
    def passed(self) -> bool:
        flags = [self.interior_pass, self.boundary_pass, self.cone_pass]
        flags += [bool(c["pass"]) for c in self.checks.values()]
        return all(f for f in flags if f is not None)

    def add_check(self, name: str, value: Any, passed: bool) -> None:
        self.checks[name] = {"value": value, "pass": bool(passed)}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "interior_residual_max": self.interior_residual_max,
            "boundary_residual_max": self.boundary_residual_max,
            "cone_margin_min": self.cone_margin_min,
            "pass": self.passed,
            "interior_pass": self.interior_pass,
            "boundary_pass": self.boundary_pass,
            "cone_pass": self.cone_pass,
            "tolerance": self.tolerance,
            "method": self.method,
            "interior_points": self.interior_points,
            "boundary_points": self.boundary_points,
            "skipped_points": self.skipped_points,
            "checks": self.checks,
            "grid": self.grid,
            "seed": self.seed,
        }


def residual(
    v: ScalarField,
    f: SymFunc,
    cone: Cone,
    p: float,
    bc: float,
    grid: GridSpec,
    method: str = "analytic",
    tol: Optional[float] = None,
) -> VerifyReport:
    """Interior, boundary and cone residuals of v on the grid."""
    analytic = method == "analytic" and v.has_analytic_jet
    if tol is None:
        tol = RESIDUAL_TOL_ANALYTIC if analytic else RESIDUAL_TOL_FD
    interior: List[float] = []
    boundary: List[float] = []
    margins: List[float] = []
    skipped = 0
    for x in grid.points():
        if not v.contains(x):
            skipped += 1
            continue
        try:
            j = jet(v, x, method)
        except StencilError:
            skipped += 1
            continue
        lams = hessian_eigenvalues(j)
        margins.append(cone_margin(cone, lams))
        if x[-1] > 0.0:
            interior.append(abs(f.raw(lams) - math.exp(-p * j.value)))
        else:
            boundary.append(abs(float(j.gradient[-1]) - bc * math.exp(j.value)))
    if not margins:
        raise InputError("no grid point lies in the field domain")
    if skipped:
        logger.info("residual: skipped %d grid points outside the domain", skipped)
    report = VerifyReport(
        interior_residual_max=max(interior) if interior else 0.0,
        boundary_residual_max=max(boundary) if boundary else 0.0,
        cone_margin_min=min(margins),
        tolerance=tol,
        method="analytic" if analytic else "finite_difference",
        interior_points=len(interior),
        boundary_points=len(boundary),
        skipped_points=skipped,
        grid=grid.to_dict(),
        seed=grid.seed,
    )
    logger.info(
        "residual %s with %s: interior %.3e, boundary %.3e, cone margin %.3e",
        v.kind, f.name, report.interior_residual_max, report.boundary_residual_max, report.cone_margin_min,
    )
    return report


@dataclass
class RigidityReport:
    fit: BubbleFit
    f_name: str
    bc: float
    tolerance: float
    f_value: Optional[float] = None
    interior_gap: Optional[float] = None
    boundary_gap: Optional[float] = None
    weitzenbock: Optional[Dict[str, float]] = None
    reason: str = ""

    @property
    def passed(self) -> bool:
        return (
            self.interior_gap is not None
            and self.boundary_gap is not None
            and self.interior_gap <= self.tolerance
            and self.boundary_gap <= self.tolerance
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pass": self.passed,
            "fit": self.fit.to_dict(),
            "f": self.f_name,
            "c": self.bc,
            "f_value": self.f_value,
            "interior_gap": self.interior_gap,
            "boundary_gap": self.boundary_gap,
            "weitzenbock": self.weitzenbock,
            "tolerance": self.tolerance,
            "reason": self.reason,
        }


def rigidity_check(
    v: ScalarField,
    f: SymFunc,
    cone: Cone,
    bc: float,
    grid: GridSpec,
    tol: float = RIGIDITY_TOL,
) -> RigidityReport:
    """
    Fit a bubble to v on the grid and test f(2 a^-2 b e) = 1 and
    2 a^-1 b xbar_n = c.
    """
    fit = bubble_fit(field_samples(v, grid.points()))
    report = RigidityReport(fit=fit, f_name=f.name, bc=bc, tolerance=tol)
    if not fit.is_bubble or fit.params is None:
        report.reason = "samples are not a bubble"
        return report
    params = fit.params
    spectrum = np.full(f.n, params.spectrum_scale())
    if cone_status(cone, spectrum) == EXTERIOR:
        report.reason = f"bubble spectrum lies outside {cone.name}"
        return report
    report.f_value = f_eval(f, spectrum)
    report.interior_gap = abs(report.f_value - 1.0)
    report.boundary_gap = abs(params.neumann_datum() - bc)
    if f.kind == "g_p":
        p = int(f.name.split(":")[1])
        constants = weitzenbock_bubble_constants(f.n, p, params.a, params.b)
        report.weitzenbock = {k: abs(val - 1.0) for k, val in constants.items()}
    if not report.passed:
        report.reason = (
            f"f gap {report.interior_gap:.3e}, boundary gap {report.boundary_gap:.3e}"
        )
    logger.info("rigidity %s: %s", f.name, "pass" if report.passed else report.reason)
    return report


# ----------------------------------------------------------------------------
# Counterexamples
# ----------------------------------------------------------------------------


@dataclass
class Counterexample:
    kind: str
    v: ScalarField
    report: VerifyReport
    params: Dict[str, Any]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "n": self.v.n,
            "params": self.params,
            "field": self.v.spec.to_dict() if self.v.spec else None,
            "report": self.report.to_dict(),
        }


def _number(params: Dict[str, Any], name: str, default: float) -> float:
    value = params.get(name, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ParameterError(f"counterexample parameter '{name}' must be a finite number")
    return float(value)


def _log_power(n: int, params: Dict[str, Any], grid: GridSpec) -> Counterexample:
    alpha = _number(params, "alpha", 1.0)
    if alpha * (alpha + 2.0) == 0.0:
        raise ParameterError("log_power needs alpha(alpha + 2) != 0")
    v = make_field(FieldSpec("log_power", n, {"alpha": alpha}))
    star = lambda_star(n)
    direction_gap, factor_min, neumann_max = 0.0, math.inf, 0.0
    for x in grid.points():
        if not v.contains(x):
            continue
        j = jet(v, x)
        r = float(np.linalg.norm(x))
        factor = alpha * (alpha + 2.0) / (2.0 * r ** (2.0 * alpha + 2.0))
        lams = hessian_eigenvalues(j)
        direction_gap = max(direction_gap, float(np.max(np.abs(lams - factor * star))) / abs(factor))
        factor_min = min(factor_min, float(lams[0]))
        if x[-1] == 0.0:
            neumann_max = max(neumann_max, abs(boundary_values(j, "neumann")))
    unit = np.zeros(n)
    unit[0] = 1.0
    report = VerifyReport(grid=grid.to_dict(), seed=grid.seed)
    report.add_check("direction_gap", direction_gap, direction_gap <= DIRECTION_TOL)
    report.add_check("factor_min", factor_min, factor_min > 0)
    unit_top = float(hessian_eigenvalues(jet(v, unit))[0])
    unit_expected = float(np.max(0.5 * alpha * (alpha + 2.0) * star))
    unit_error = abs(unit_top - unit_expected) / max(1.0, abs(unit_expected))
    report.add_check("factor_at_unit_radius", unit_top, unit_error <= RESIDUAL_TOL_ANALYTIC)
    report.add_check("neumann_max", neumann_max, neumann_max <= RESIDUAL_TOL_ANALYTIC)
    return Counterexample("log_power", v, report, {"alpha": alpha})


def _boundary_drift(n: int, params: Dict[str, Any], seed: int) -> Counterexample:
    alpha = _number(params, "alpha", 0.1)
    c = _number(params, "c", -1.0)
    if not c < 0:
        raise ParameterError(f"boundary_drift needs c < 0, got {c}")
    radius = _number(params, "radius", 1.0 / (40.0 * abs(c)))
    if not radius > 0:
        raise ParameterError("boundary_drift radius must be positive")
    cone = parse_cone(str(params.get("cone", "pair_mu:0.5")), n)
    v = make_field(FieldSpec("log_power_drift", n, {"alpha": alpha, "c": c}))
    constants = cone_constants(cone)

    margins = [cone_margin(cone, hessian_eigenvalues(jet(v, x)))
               for x in ball_samples(n, radius, COUNTEREXAMPLE_SAMPLES, seed)]
    slack = []
    for x in ball_samples(n, radius, COUNTEREXAMPLE_SAMPLES, seed, boundary=True):
        j = jet(v, x)
        slack.append(c * math.exp(j.value) - float(j.gradient[-1]))

    report = VerifyReport(cone_margin_min=min(margins), seed=seed)
    report.interior_points = len(margins)
    report.boundary_points = len(slack)
    report.add_check("mu_minus", format_mu(constants.mu_minus), constants.mu_minus < 1.0)
    report.add_check("cone_interior", min(margins), min(margins) > 0)
    report.add_check("neumann_slack_min", min(slack), min(slack) >= 0)
    return Counterexample(
        "boundary_drift", v, report, {"alpha": alpha, "c": c, "radius": radius, "cone": cone.name}
    )


def _barrier(n: int, params: Dict[str, Any], seed: int) -> Counterexample:
    mu = _number(params, "mu", 2.0)
    delta = _number(params, "delta", 0.01)
    eps = _number(params, "eps", 1.0)
    cone = parse_cone(str(params.get("cone", "min_mu:3")), n)
    spec = FieldSpec("barrier_w_delta", n, {"mu": mu, "delta": delta, "eps": eps})
    v = BarrierField(n, mu, delta, eps, spec=spec)
    if not v.radius > 3.0:
        raise ParameterError(f"barrier annulus is empty: R = {v.radius:g} <= 3")
    constants = cone_constants(cone)

    statuses, margins = [], []
    for x in annulus_samples(v.center, 3.0, v.radius, COUNTEREXAMPLE_SAMPLES, seed):
        lams = hessian_eigenvalues(jet(v, x))
        statuses.append(cone_status(cone, lams))
        margins.append(cone_margin(cone, lams))
    exterior = sum(1 for s in statuses if s == EXTERIOR) / len(statuses)
    # boundary points at distance s >= 1 from e_n
    ratios, ratio_gap = [], 0.0
    for s in np.linspace(1.0, v.radius, 12)[:-1]:
        x = np.zeros(n)
        x[0] = math.sqrt(s * s - 1.0)
        j = jet(v, x)
        ratio = math.exp(-j.value) * float(j.gradient[-1])
        closed = v.boundary_ratio(float(s))
        ratio_gap = max(ratio_gap, abs(ratio - closed) / closed)
        ratios.append(ratio)
    ratio_bound = 2.0 * eps ** (-2.0 / (mu - 1.0))

    report = VerifyReport(seed=seed)
    report.interior_points = len(statuses)
    report.add_check("mu_below_mu_minus", format_mu(constants.mu_minus), mu < constants.mu_minus)
    report.add_check("exterior_fraction", exterior, exterior == 1.0)
    report.add_check("cone_margin_max", max(margins), max(margins) < 0)
    report.add_check("boundary_ratio_gap", ratio_gap, ratio_gap <= RESIDUAL_TOL_ANALYTIC)
    ratio_ok = min(ratios) >= ratio_bound * (1.0 - RESIDUAL_TOL_ANALYTIC)
    report.add_check("boundary_ratio_min", min(ratios), ratio_ok)
    return Counterexample(
        "barrier", v, report,
        {"mu": mu, "delta": delta, "eps": eps, "cone": cone.name, "R": v.radius},
    )


def _xn_only(n: int, params: Dict[str, Any], grid: GridSpec) -> Counterexample:
    mu = _number(params, "mu", 3.0)
    c = _number(params, "c", 1.0)
    v = make_field(FieldSpec("one_var_min_f", n, {"mu": mu, "c": c}))
    f = make_symfunc("min_mu_shifted", n, mu)
    report = residual(v, f, f.cone, 0.0, c, grid)
    return Counterexample("xn_only", v, report, {"mu": mu, "c": c, "f": f.name, "cone": f.cone.name})


def _aux_lemma23(n: int, params: Dict[str, Any], seed: int) -> Counterexample:
    alpha = _number(params, "alpha", 0.05)
    d = _number(params, "delta_tilde", 1.0)
    radius = _number(params, "radius", 0.05)
    if not (alpha > 0 and radius > 0):
        raise ParameterError("aux_lemma23 needs alpha > 0 and radius > 0")
    cone = parse_cone(str(params.get("cone", "gamma_k:1")), n)
    constants = cone_constants(cone)
    v = make_field(FieldSpec("aux_lemma23", n, {"alpha": alpha, "delta_tilde": d}))
    v0 = LogQuadraticField(n, 0.0, d, 2.5 * d * d)

    statuses, w0_top = [], -math.inf
    for x in ball_samples(n, radius, COUNTEREXAMPLE_SAMPLES, seed):
        statuses.append(cone_status(cone, hessian_eigenvalues(jet(v, x))))
        w0_top = max(w0_top, float(eigenvalues(w_tensor(jet(v0, x)))[0]))
    exterior = sum(1 for s in statuses if s == EXTERIOR) / len(statuses)

    report = VerifyReport(seed=seed)
    report.interior_points = len(statuses)
    report.add_check("lambda_star_outside_closure", not constants.lambda_star_in_closure,
                     not constants.lambda_star_in_closure)
    report.add_check("exterior_fraction", exterior, exterior == 1.0)
    report.add_check("w0_max_eigenvalue", w0_top, w0_top <= -d * d)
    return Counterexample(
        "aux_lemma23", v, report,
        {"alpha": alpha, "delta_tilde": d, "tau": 5.0 * d * d, "radius": radius, "cone": cone.name},
    )


def counterexample(
    kind: str,
    n: int = 3,
    params: Optional[Dict[str, Any]] = None,
    grid: Optional[GridSpec] = None,
    seed: int = 0,
) -> Counterexample:
    """Build a catalog field and verify the property claimed for it."""
    params = dict(params or {})
    if kind not in COUNTEREXAMPLE_KINDS:
        raise ParameterError(f"unknown counterexample '{kind}', expected one of {COUNTEREXAMPLE_KINDS}")
    if grid is None:
        grid = default_grid(n, seed=seed)
    if kind == "log_power":
        result = _log_power(n, params, grid)
    elif kind == "boundary_drift":
        result = _boundary_drift(n, params, seed)
    elif kind == "barrier":
        result = _barrier(n, params, seed)
    elif kind == "xn_only":
        result = _xn_only(n, params, grid)
    else:
        result = _aux_lemma23(n, params, seed)
    logger.info("counterexample %s: %s", kind, "verified" if result.report.passed else "FAILED")
    return result
