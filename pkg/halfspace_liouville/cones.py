"""
Symmetric open cones and symmetric operators on eigenvalue vectors.

A Cone is cut out by a defining function g > 0 evaluated on the
descending-sorted eigenvalue vector; a SymFunc is an operator f on the
closure of its paired cone. Both sort their input, so permutation
invariance holds exactly.

Catalog names follow ``<kind>:<parameter>``:

    cones      gamma_k:<k>  g_p:<p>  min_mu:<mu>  pair_mu:<mu>  custom:<file>
    operators  sigma_k:<k>  g_p:<p>  min_mu:<mu>  min_mu_shifted:<mu>
               affine:<s>   custom:<file>
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .config import get_section
from .exceptions import DomainError, InputError, ParameterError, SpecFormatError, ValidationError
from .expressions import parse_expression

logger = logging.getLogger(__name__)

_CONES = get_section("cones")
MU_MAX = float(_CONES["mu_max"])
MEMBERSHIP_TOL = float(_CONES["membership_tol"])
MU_BISECTION_TOL = float(_CONES["mu_bisection_tol"])
SAMPLE_SHELL = tuple(float(s) for s in _CONES["sample_shell"])
LEVEL_SET_BAND = float(_CONES["level_set_band"])

INTERIOR = "interior"
BOUNDARY = "boundary"
EXTERIOR = "exterior"

CONE_KINDS = ("gamma_k", "g_p", "min_mu", "pair_mu", "custom")
FUNC_KINDS = ("sigma_k", "g_p", "min_mu", "min_mu_shifted", "affine", "custom")


def sorted_desc(lams: Sequence[float]) -> np.ndarray:
    return np.sort(np.asarray(lams, dtype=float))[::-1]


def is_sorted_desc(lams: np.ndarray) -> bool:
    return bool(np.all(np.diff(lams) <= 0))


def elementary_symmetric(lams: Sequence[float], k: int) -> float:
    """sigma_k(lams) from the coefficients of prod (x - lam_i)."""
    coeffs = np.poly(np.asarray(lams, dtype=float))
    return float((-1) ** k * coeffs[k])


def weitzenbock(lams: Sequence[float], p: int) -> float:
    """G_p = p * (sum of the n-p largest) + (n-p) * (sum of the p smallest)."""
    s = sorted_desc(lams)
    n = s.size
    return float(p * np.sum(s[: n - p]) + (n - p) * np.sum(s[n - p:]))


def min_type(lams: Sequence[float], kappa: float) -> float:
    """min_i (lam_i + kappa * sum_{j != i} lam_j)"""
    s = np.asarray(lams, dtype=float)
    total = float(np.sum(s))
    return float(np.min(s + kappa * (total - s)))


@dataclass(frozen=True)
class Cone:
    """Open symmetric cone {g > 0}; ``g`` receives descending-sorted input."""

    n: int
    kind: str
    name: str
    g: Callable[[np.ndarray], float] = field(repr=False, compare=False)
    mu_closed_form: Optional[float] = None
    note: str = ""

    def defining(self, lams: Sequence[float]) -> float:
        return float(self.g(sorted_desc(lams)))


@dataclass(frozen=True)
class SymFunc:
    """Symmetric operator f on the closure of its paired cone."""

    n: int
    kind: str
    name: str
    evaluator: Callable[[np.ndarray], float] = field(repr=False, compare=False)
    cone: Cone = field(repr=False, compare=False)
    degree: Optional[float] = None

    def raw(self, lams: Sequence[float]) -> float:
        """f without the cone check; used by inversion and residuals."""
        return float(self.evaluator(sorted_desc(lams)))


@dataclass(frozen=True)
class ConeConstants:
    mu_minus: float
    lambda_star_in_closure: bool
    e_n_on_boundary: bool
    mu_closed_form: Optional[float] = None
    lambda_star_status: str = ""
    e_n_status: str = ""
    consistent: bool = True

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["mu_minus"] = format_mu(self.mu_minus)
        data["mu_closed_form"] = (
            None if self.mu_closed_form is None else format_mu(self.mu_closed_form)
        )
        return data


def format_mu(mu: float) -> Any:
    return "unbounded" if math.isinf(mu) else mu


# ----------------------------------------------------------------------------
# Construction
# ----------------------------------------------------------------------------


def make_cone(kind: str, n: int, param: Any = None) -> Cone:
    """
    Build a catalog cone. ``param`` is k for gamma_k, p for g_p, mu for
    min_mu and pair_mu, and an expression string for custom.
    """
    if n < 2:
        raise ParameterError(f"cones need n >= 2, got {n}")
    if kind == "gamma_k":
        k = _integer(param, "k")
        if not 1 <= k <= n:
            raise ParameterError(f"gamma_k needs 1 <= k <= n, got k={k}, n={n}")
        mu = float(n - 1) if k == 1 else math.inf
        return Cone(
            n,
            kind,
            f"gamma_k:{k}",
            lambda s: min(elementary_symmetric(s, l) for l in range(1, k + 1)),
            mu,
            "min(sigma_1, ..., sigma_k); sigma_l has degree l",
        )
    if kind == "g_p":
        p = _integer(param, "p")
        if not 1 <= p <= n - 1:
            raise ParameterError(f"g_p needs 1 <= p <= n-1, got p={p}, n={n}")
        return Cone(
            n, kind, f"g_p:{p}", lambda s: weitzenbock(s, p), 2.0 * (n - p) - 1.0, "G_p, degree 1"
        )
    if kind == "min_mu":
        mu = _positive(param, "mu")
        kappa = (mu + 1.0) / (2.0 * (n - 1))
        closed = max((mu + 1.0) / 2.0, n - 2.0 + 2.0 * (n - 1.0) / (mu + 1.0))
        return Cone(
            n, kind, f"min_mu:{_fmt(mu)}", lambda s: min_type(s, kappa), closed, "min-type, degree 1"
        )
    if kind == "pair_mu":
        mu = _positive(param, "mu")
        return Cone(
            n, kind, f"pair_mu:{_fmt(mu)}", lambda s: float(s[0] + mu * s[1]), mu,
            "lam_1 + mu lam_2 on sorted input, degree 1",
        )
    if kind == "custom":
        expr = parse_expression(str(param), n, prefix="l")
        cone = Cone(n, kind, f"custom:{expr.text}", lambda s: expr(list(s)), None, "user expression")
        validate_cone(cone)
        return cone
    raise ParameterError(f"unknown cone kind '{kind}', expected one of {CONE_KINDS}")


def make_symfunc(kind: str, n: int, param: Any = None, cone: Optional[Cone] = None) -> SymFunc:
    """Build a catalog operator, paired with its natural cone unless ``cone`` is given."""
    if kind == "sigma_k":
        k = _integer(param, "k")
        if not 1 <= k <= n:
            raise ParameterError(f"sigma_k needs 1 <= k <= n, got k={k}, n={n}")
        cone = cone or make_cone("gamma_k", n, k)
        return SymFunc(n, kind, f"sigma_k:{k}", lambda s: elementary_symmetric(s, k), cone, float(k))
    if kind == "g_p":
        p = _integer(param, "p")
        cone = cone or make_cone("g_p", n, p)
        return SymFunc(n, kind, f"g_p:{p}", lambda s: weitzenbock(s, p), cone, 1.0)
    if kind in ("min_mu", "min_mu_shifted"):
        mu = _positive(param, "mu")
        kappa = mu / (n - 1.0)
        cone = cone or make_cone("min_mu", n, mu)
        if kind == "min_mu":
            return SymFunc(n, kind, f"min_mu:{_fmt(mu)}", lambda s: min_type(s, kappa), cone, 1.0)
        return SymFunc(
            n, kind, f"min_mu_shifted:{_fmt(mu)}", lambda s: min_type(s, kappa) + 1.0, cone, None
        )
    if kind == "affine":
        s_coef = _positive(param, "s")
        cone = cone or make_cone("pair_mu", n, s_coef)
        return SymFunc(
            n, kind, f"affine:{_fmt(s_coef)}", lambda s: float(s[0] + s_coef * s[1]), cone, 1.0
        )
    if kind == "custom":
        if cone is None:
            raise ParameterError("a custom operator needs an explicit cone")
        expr = parse_expression(str(param), n, prefix="l")
        return SymFunc(n, kind, f"custom:{expr.text}", lambda s: expr(list(s)), cone, None)
    raise ParameterError(f"unknown operator kind '{kind}', expected one of {FUNC_KINDS}")


def _fmt(x: float) -> str:
    return format(float(x), "g")


def _integer(param: Any, name: str) -> int:
    try:
        value = float(param)
    except (TypeError, ValueError) as e:
        raise ParameterError(f"{name} must be an integer, got {param!r}") from e
    if value != int(value):
        raise ParameterError(f"{name} must be an integer, got {param!r}")
    return int(value)


def _positive(param: Any, name: str) -> float:
    try:
        value = float(param)
    except (TypeError, ValueError) as e:
        raise ParameterError(f"{name} must be a number, got {param!r}") from e
    if not (value > 0 and math.isfinite(value)):
        raise ParameterError(f"{name} must be positive, got {param!r}")
    return value


def _split_catalog(name: str) -> Tuple[str, str]:
    if not isinstance(name, str) or ":" not in name:
        raise SpecFormatError(f"catalog names look like 'kind:parameter', got {name!r}")
    kind, _, param = name.partition(":")
    return kind.strip(), param.strip()


def _read_custom(path: str) -> Dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise SpecFormatError(f"cannot read custom file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise SpecFormatError(f"invalid JSON in custom file {path}: {e}") from e
    if not isinstance(data, dict) or "expr" not in data:
        raise SpecFormatError(f"custom file {path} must be an object with an 'expr' key")
    return data


def parse_cone(name: str, n: int) -> Cone:
    """Resolve a cone catalog name; ``custom:<file>`` reads {"expr": ...}."""
    kind, param = _split_catalog(name)
    if kind == "custom":
        data = _read_custom(param)
        cone = make_cone("custom", n, data["expr"])
        if "mu_minus" in data:
            mu = math.inf if data["mu_minus"] == "unbounded" else float(data["mu_minus"])
            cone = Cone(cone.n, cone.kind, f"custom:{param}", cone.g, mu, cone.note)
        return cone
    if kind not in CONE_KINDS:
        raise SpecFormatError(f"unknown cone kind '{kind}'")
    return make_cone(kind, n, param)


def parse_symfunc(name: str, n: int, cone: Optional[Cone] = None) -> SymFunc:
    """
    Resolve an operator catalog name. ``custom:<file>`` reads
    {"expr": ..., "cone": <catalog name>, "degree": optional}.
    """
    kind, param = _split_catalog(name)
    if kind == "custom":
        data = _read_custom(param)
        if cone is None:
            if "cone" not in data:
                raise SpecFormatError(f"custom operator {param} must name its cone")
            cone = parse_cone(data["cone"], n)
        f = make_symfunc("custom", n, data["expr"], cone)
        degree = data.get("degree")
        return SymFunc(n, "custom", f"custom:{param}", f.evaluator, cone, degree)
    if kind not in FUNC_KINDS:
        raise SpecFormatError(f"unknown operator kind '{kind}'")
    return make_symfunc(kind, n, param, cone)


# ----------------------------------------------------------------------------
# Membership and constants
# ----------------------------------------------------------------------------


def cone_status(c: Cone, lams: Sequence[float], tol: float = MEMBERSHIP_TOL) -> str:
    """interior / boundary / exterior with tolerance tol * max(1, |lams|)."""
    vec = np.asarray(lams, dtype=float)
    if vec.size != c.n:
        raise InputError(f"expected {c.n} eigenvalues, got {vec.size}")
    if not is_sorted_desc(vec):
        raise InputError("eigenvalues must be sorted in descending order")
    return _status(c, vec, tol)


def _status(c: Cone, s: np.ndarray, tol: float = MEMBERSHIP_TOL) -> str:
    g = float(c.g(s))
    scale = max(1.0, float(np.linalg.norm(s)))
    if g >= tol * scale:
        return INTERIOR
    if g <= -tol * scale:
        return EXTERIOR
    return BOUNDARY


def cone_margin(c: Cone, lams: Sequence[float]) -> float:
    """g / max(1, |lams|); positive inside the cone."""
    s = sorted_desc(lams)
    return float(c.g(s)) / max(1.0, float(np.linalg.norm(s)))


def _ray_point(n: int, t: float) -> np.ndarray:
    return sorted_desc([t] + [-1.0] * (n - 1))


def mu_minus(c: Cone, tol: float = MU_BISECTION_TOL) -> float:
    """
    inf {t : (t, -1, ..., -1) in closure of the cone} by bisection on [0, MU_MAX];
    math.inf when no admissible t exists up to MU_MAX.
    """
    def admissible(t: float) -> bool:
        return float(c.g(_ray_point(c.n, t))) >= 0.0

    if not admissible(MU_MAX):
        logger.debug("%s: no admissible ray point up to MU_MAX, mu_minus unbounded", c.name)
        return math.inf
    if admissible(0.0):
        return 0.0
    lo, hi = 0.0, MU_MAX
    while hi - lo > tol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            hi = mid
        else:
            lo = mid
    logger.debug("%s: mu_minus bracket [%.12g, %.12g]", c.name, lo, hi)
    return hi


def lambda_star(n: int) -> np.ndarray:
    return _ray_point(n, 1.0)


def e_n_vector(n: int) -> np.ndarray:
    e = np.zeros(n)
    e[0] = 1.0
    return e


def cone_constants(c: Cone, tol: float = MU_BISECTION_TOL) -> ConeConstants:
    mu = mu_minus(c, tol)
    star_in = mu <= 1.0 + max(tol, MEMBERSHIP_TOL)
    en_boundary = math.isinf(mu)
    star_status = _status(c, lambda_star(c.n))
    en_status = _status(c, e_n_vector(c.n))
    consistent = (star_in == (star_status != EXTERIOR)) and (en_boundary == (en_status == BOUNDARY))
    if not consistent:
        logger.warning(
            "%s: direct status (lambda*: %s, e_n: %s) disagrees with mu_minus=%s",
            c.name, star_status, en_status, format_mu(mu),
        )
    return ConeConstants(
        mu_minus=mu,
        lambda_star_in_closure=star_in,
        e_n_on_boundary=en_boundary,
        mu_closed_form=c.mu_closed_form,
        lambda_star_status=star_status,
        e_n_status=en_status,
        consistent=consistent,
    )


def f_eval(f: SymFunc, lams: Sequence[float], tol: float = MEMBERSHIP_TOL) -> float:
    """f(lams) for lams in the closure of f's cone; exterior input raises DomainError."""
    s = sorted_desc(lams)
    if s.size != f.n:
        raise InputError(f"expected {f.n} eigenvalues, got {s.size}")
    if _status(f.cone, s, tol) == EXTERIOR:
        raise DomainError(f"{s.tolist()} lies outside the closure of {f.cone.name}")
    return float(f.evaluator(s))


# ----------------------------------------------------------------------------
# Sampled structure checks
# ----------------------------------------------------------------------------


def sample_cone_points(
    c: Cone, count: int, rng: np.random.Generator, shell: Tuple[float, float] = SAMPLE_SHELL
) -> List[np.ndarray]:
    """Interior points with norms in ``shell``, by rejection from the sphere."""
    points: List[np.ndarray] = []
    attempts = 0
    while len(points) < count and attempts < 2000 * count:
        attempts += 1
        d = rng.normal(size=c.n)
        d /= np.linalg.norm(d)
        lam = rng.uniform(*shell) * d
        if _status(c, sorted_desc(lam)) == INTERIOR:
            points.append(lam)
    if len(points) < count:
        logger.warning("%s: only %d of %d interior samples found", c.name, len(points), count)
    return points


def validate_cone(c: Cone, samples: int = 32, seed: int = 0) -> None:
    """Sampled check that g is monotone along e and under adding positive vectors."""
    rng = np.random.default_rng(seed)
    ts = np.linspace(0.0, 4.0, 9)
    for _ in range(samples):
        lam = rng.normal(size=c.n)
        values = [c.g(sorted_desc(lam + t)) for t in ts]
        if np.any(np.diff(values) < -1e-12 * max(1.0, float(np.max(np.abs(values))))):
            raise ValidationError(f"{c.name}: g(lam + t e) decreases in t at {lam.tolist()}")
    points = sample_cone_points(c, samples, rng)
    if not points:
        raise ValidationError(f"{c.name}: no interior points found; the cone looks empty")
    for lam in points:
        shifted = lam + rng.uniform(0.0, 1.0, size=c.n)
        if _status(c, sorted_desc(shifted)) != INTERIOR:
            raise ValidationError(f"{c.name}: adding a positive vector left the cone")


@dataclass
class ConditionsReport:
    seed: int
    sample_count: int
    min_partial: float
    max_partial: float
    partial_values: List[float]
    min_level_norm: float
    homogeneity_degree: float
    homogeneity_residual: float
    min_level_boundary_distance: float
    level_points: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _ray_to_level(f: SymFunc, direction: np.ndarray, t_cap: float = 1e6) -> Optional[float]:
    """t > 0 with f(t d) = 1 along an interior ray, if the ray reaches the level."""
    def h(t: float) -> float:
        return f.raw(t * direction) - 1.0

    lo = 1e-6
    try:
        start = h(lo)
        if abs(start) <= LEVEL_SET_BAND:
            return lo
        if start > 0:
            return None
        hi = 1.0
        while h(hi) < 0:
            lo, hi = hi, 2.0 * hi
            if hi > t_cap:
                return None
        return float(brentq(h, lo, hi, xtol=1e-14, rtol=1e-12))
    except (ValueError, ArithmeticError):
        return None


def _ray_distance_to_boundary(c: Cone, lam: np.ndarray, d: np.ndarray) -> float:
    """Smallest s >= 0 with g(lam + s d) <= 0, or inf."""
    def g(s: float) -> float:
        return float(c.g(sorted_desc(lam + s * d)))

    if g(0.0) <= 0:
        return 0.0
    hi = 1e-3
    while g(hi) > 0:
        hi *= 2.0
        if hi > 1e6:
            return math.inf
    return float(brentq(g, 0.0, hi, xtol=1e-12))


def check_conditions(f: SymFunc, c: Cone, sample_count: int = 64, seed: int = 0) -> ConditionsReport:
    """
    Falsification report for the structural conditions on (f, cone).

    Reports (a) sampled partial derivatives on a shell of the cone,
    (b) the smallest norm on the sampled level set f = 1, (c) a fitted
    homogeneity degree over t in [0.5, 2], and (d) the smallest sampled
    distance from the level set to the boundary of the cone. Sampling can
    refute the conditions but never prove them.
    """
    if sample_count < 1:
        raise InputError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    points = sample_cone_points(c, sample_count, rng)

    partials: List[float] = []
    for lam in points:
        for i in range(c.n):
            h = 1e-6 * max(1.0, abs(lam[i]))
            up, down = lam.copy(), lam.copy()
            up[i] += h
            down[i] -= h
            partials.append((f.raw(up) - f.raw(down)) / (2.0 * h))

    ts = np.linspace(SAMPLE_SHELL[0], SAMPLE_SHELL[1], 7)
    xs: List[float] = []
    ys: List[float] = []
    for lam in points:
        base = f.raw(lam)
        if base <= 0:
            continue
        for t in ts:
            value = f.raw(t * lam)
            if value > 0 and t != 1.0:
                xs.append(math.log(t))
                ys.append(math.log(value / base))
    if xs:
        x_arr, y_arr = np.array(xs), np.array(ys)
        degree = float(x_arr @ y_arr / (x_arr @ x_arr))
        residual = float(np.max(np.abs(y_arr - degree * x_arr)))
    else:
        degree, residual = math.nan, math.nan

    directions = [-np.ones(c.n) / math.sqrt(c.n)] + [-np.eye(c.n)[i] for i in range(c.n)]
    level_norms: List[float] = []
    level_dists: List[float] = []
    for lam in points:
        unit = lam / np.linalg.norm(lam)
        t = _ray_to_level(f, unit)
        if t is None:
            continue
        level = t * unit
        if abs(f.raw(level) - 1.0) > LEVEL_SET_BAND:
            continue
        level_norms.append(float(np.linalg.norm(level)))
        level_dists.append(min(_ray_distance_to_boundary(c, level, d) for d in directions))

    return ConditionsReport(
        seed=seed,
        sample_count=len(points),
        min_partial=float(min(partials)) if partials else math.nan,
        max_partial=float(max(partials)) if partials else math.nan,
        partial_values=sorted({round(p, 6) for p in partials}),
        min_level_norm=min(level_norms) if level_norms else math.inf,
        homogeneity_degree=degree,
        homogeneity_residual=residual,
        min_level_boundary_distance=min(level_dists) if level_dists else math.inf,
        level_points=len(level_norms),
    )


def h1_holds(mu: float, p: float, degree: float, tol: float = 1e-6) -> bool:
    """Homogeneous degree-1 form of (H1): p in [0, mu + 1)."""
    return abs(degree - 1.0) <= tol and 0.0 <= p < mu + 1.0


def h2_holds(mu: float, p: float, degree: float, tol: float = 1e-6) -> bool:
    """Homogeneous degree-1 form of (H2): p in [0, mu + 1]."""
    return abs(degree - 1.0) <= tol and 0.0 <= p <= mu + 1.0


def nonexistence_applies(constants: ConeConstants, c: float, p: float, degree: float) -> bool:
    """One-variable nonexistence hypotheses: e_n off the boundary, c > 0, (H1) or (H2)."""
    mu = constants.mu_minus
    return (
        not constants.e_n_on_boundary
        and c > 0
        and (h1_holds(mu, p, degree) or h2_holds(mu, p, degree))
    )


def weitzenbock_bubble_constants(n: int, p: int, a: float, b: float) -> Dict[str, float]:
    """
    G_p at the bubble spectrum 2 a^-2 b e in both normalizations:
    direct evaluation 4 p (n-p) b / a^2 and the halved 2 p (n-p) b / a^2.
    """
    direct = weitzenbock(np.full(n, 2.0 * b / a**2), p)
    return {"direct": direct, "halved": 2.0 * p * (n - p) * b / a**2}
