"""
Conformal factors v: R^n -> R as evaluable fields.

Every closed-form family carries exact value/gradient/Hessian jets; fields
without analytic derivatives (custom callbacks, expressions) are
differentiated with central finite differences. Fields are immutable after
construction and all evaluation is re-entrant.
"""

import json
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .config import get_section
from .exceptions import DomainError, ParameterError, SpecFormatError, StencilError
from .expressions import FIELD_FUNCTIONS, parse_expression
from .points import as_point

logger = logging.getLogger(__name__)

_FIELDS = get_section("fields")
R_MIN = float(_FIELDS["r_min"])
FD_TOL_VALUE = float(_FIELDS["fd_tol_value"])
FD_TOL_GRADIENT = float(_FIELDS["fd_tol_gradient"])
FD_TOL_HESSIAN = float(_FIELDS["fd_tol_hessian"])

EPS = np.finfo(float).eps
GRADIENT_STEP = EPS ** (1.0 / 3.0)
HESSIAN_STEP = EPS ** (1.0 / 4.0)

FIELD_KINDS = (
    "bubble",
    "log_power",
    "log_power_drift",
    "barrier_w_delta",
    "one_var_tabulated",
    "one_var_min_f",
    "custom",
    "constant",
    "linear",
    "aux_lemma23",
)

METHODS = ("analytic", "finite_difference")


@dataclass(frozen=True)
class Jet:
    """Value, gradient and Hessian of a field at one point."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    point: np.ndarray
    method: str = "analytic"

    @property
    def n(self) -> int:
        return int(self.gradient.size)

    def shifted(self, kappa: float) -> "Jet":
        """The jet of v + kappa."""
        return Jet(self.value + kappa, self.gradient, self.hessian, self.point, self.method)


@dataclass(frozen=True)
class FieldSpec:
    """Serializable description of a closed-form field: kind, dimension, parameters."""

    kind: str
    n: int
    params: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "n": self.n, "params": self.params}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: Any) -> "FieldSpec":
        if not isinstance(data, dict):
            raise SpecFormatError("field spec must be a JSON object")
        missing = {"kind", "n", "params"} - set(data)
        if missing:
            raise SpecFormatError(f"field spec is missing keys: {sorted(missing)}")
        kind, n, params = data["kind"], data["n"], data["params"]
        if kind not in FIELD_KINDS:
            raise SpecFormatError(f"unknown field kind '{kind}'")
        if not isinstance(n, int) or isinstance(n, bool) or n < 2:
            raise SpecFormatError(f"field dimension must be an integer >= 2, got {n!r}")
        if not isinstance(params, dict):
            raise SpecFormatError("field params must be a JSON object")
        return cls(kind=kind, n=n, params=params)

    @classmethod
    def loads(cls, text: str) -> "FieldSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise SpecFormatError(f"invalid JSON in field spec: {e}") from e
        return cls.from_dict(data)


def load_field_spec(path: Union[str, Path]) -> FieldSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SpecFormatError(f"cannot read field spec {path}: {e}") from e
    return FieldSpec.loads(text)


class ScalarField(ABC):
    """
    A conformal factor v on an open subset of R^n.

    Subclasses implement ``contains`` and ``_value``; closed-form kinds also
    implement ``_analytic_jet``. Points are validated before evaluation and
    evaluation outside the domain raises DomainError.
    """

    kind = "abstract"
    has_analytic_jet = True

    def __init__(self, n: int, spec: Optional[FieldSpec] = None):
        if n < 2:
            raise ParameterError(f"field dimension must be >= 2, got {n}")
        self.n = n
        self.spec = spec

    @abstractmethod
    def contains(self, x: np.ndarray) -> bool:
        """True when x lies in the open domain of the field."""

    @abstractmethod
    def _value(self, x: np.ndarray) -> float:
        ...

    def _analytic_jet(self, x: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _checked(self, x: Any) -> np.ndarray:
        point = as_point(x, self.n)
        if not self.contains(point):
            raise DomainError(f"{self.kind} field is not defined at {point.tolist()}")
        return point

    def value(self, x: Any) -> float:
        return float(self._value(self._checked(x)))

    def __call__(self, x: Any) -> float:
        return self.value(x)

    def jet(self, x: Any, method: str = "analytic") -> Jet:
        return jet(self, x, method)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n})"


def jet(v: ScalarField, x: Any, method: str = "analytic") -> Jet:
    """
    Evaluate value, gradient and Hessian of ``v`` at ``x``.

    ``analytic`` falls back to finite differences for fields that have no
    closed-form derivatives; the returned Jet records the method used.
    """
    if method not in METHODS:
        raise ParameterError(f"unknown jet method '{method}', expected one of {METHODS}")
    point = v._checked(x)
    if method == "analytic" and v.has_analytic_jet:
        value, grad, hess = v._analytic_jet(point)
        return Jet(float(value), np.asarray(grad, float), np.asarray(hess, float), point, "analytic")
    return finite_difference_jet(v, point)


def finite_difference_jet(v: ScalarField, x: np.ndarray) -> Jet:
    """
    Central-difference jet.

    Gradient: 5-point stencil, h_i = max(1, |x_i|) * eps^(1/3).
    Hessian: 5-point diagonal and 4-point mixed stencils with
    h_i = max(1, |x_i|) * eps^(1/4).
    """
    n = x.size

    def f(y: np.ndarray) -> float:
        if not v.contains(y):
            raise StencilError(
                f"finite-difference stencil at {x.tolist()} leaves the {v.kind} domain"
            )
        return float(v._value(y))

    f0 = f(x)
    grad = np.zeros(n)
    hess = np.zeros((n, n))
    hg = np.maximum(1.0, np.abs(x)) * GRADIENT_STEP
    hh = np.maximum(1.0, np.abs(x)) * HESSIAN_STEP
    eye = np.eye(n)

    for i in range(n):
        ei = eye[i]
        h = hg[i]
        grad[i] = (-f(x + 2 * h * ei) + 8 * f(x + h * ei) - 8 * f(x - h * ei) + f(x - 2 * h * ei)) / (
            12 * h
        )
        h = hh[i]
        hess[i, i] = (
            -f(x + 2 * h * ei) + 16 * f(x + h * ei) - 30 * f0 + 16 * f(x - h * ei) - f(x - 2 * h * ei)
        ) / (12 * h * h)

    for i in range(n):
        for j in range(i + 1, n):
            di = hh[i] * eye[i]
            dj = hh[j] * eye[j]
            mixed = (f(x + di + dj) - f(x + di - dj) - f(x - di + dj) + f(x - di - dj)) / (
                4 * hh[i] * hh[j]
            )
            hess[i, j] = hess[j, i] = mixed

    return Jet(f0, grad, hess, x, "finite_difference")


def radial_jet(
    d: np.ndarray, s: float, value: float, ds: float, dss: float
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Jet of a function of s = |d| from its first two radial derivatives."""
    u = d / s
    outer = np.outer(u, u)
    grad = ds * u
    hess = dss * outer + (ds / s) * (np.eye(d.size) - outer)
    return value, grad, hess


# ----------------------------------------------------------------------------
# Closed-form families
# ----------------------------------------------------------------------------


class ConstantField(ScalarField):
    kind = "constant"

    def __init__(self, n: int, kappa: float = 0.0, spec: Optional[FieldSpec] = None):
        super().__init__(n, spec)
        self.kappa = float(kappa)

    def contains(self, x: np.ndarray) -> bool:
        return True

    def _value(self, x: np.ndarray) -> float:
        return self.kappa

    def _analytic_jet(self, x: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        return self.kappa, np.zeros(self.n), np.zeros((self.n, self.n))


class LinearField(ScalarField):
    """v(x) = kappa + g . x"""

    kind = "linear"

    def __init__(
        self, n: int, g: Sequence[float], kappa: float = 0.0, spec: Optional[FieldSpec] = None
    ):
        super().__init__(n, spec)
        self.g = np.array(g, dtype=float)
        if self.g.shape != (n,):
            raise ParameterError(f"linear field needs a gradient of length {n}")
        self.kappa = float(kappa)

    def contains(self, x: np.ndarray) -> bool:
        return True

    def _value(self, x: np.ndarray) -> float:
        return self.kappa + float(self.g @ x)

    def _analytic_jet(self, x: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        return self._value(x), self.g.copy(), np.zeros((self.n, self.n))


class BubbleField(ScalarField):
    """v(x) = log(a / (1 + b|x - xbar|^2)), a > 0, b > 0."""

    kind = "bubble"

    def __init__(
        self, n: int, a: float, b: float, xbar: Sequence[float], spec: Optional[FieldSpec] = None
    ):
        super().__init__(n, spec)
        if not (a > 0 and b > 0):
            raise ParameterError(f"bubble needs a > 0 and b > 0, got a={a}, b={b}")
        self.a = float(a)
        self.b = float(b)
        self.xbar = np.array(xbar, dtype=float)
        if self.xbar.shape != (n,):
            raise ParameterError(f"bubble center must have length {n}")

    def contains(self, x: np.ndarray) -> bool:
        return True

    def _value(self, x: np.ndarray) -> float:
        d = x - self.xbar
        return math.log(self.a) - math.log1p(self.b * float(d @ d))

    def _analytic_jet(self, x: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        d = x - self.xbar
        q = 1.0 + self.b * float(d @ d)
        grad = -2.0 * self.b * d / q
        hess = -2.0 * self.b * np.eye(self.n) / q + 4.0 * self.b**2 * np.outer(d, d) / q**2
        return self._value(x), grad, hess


class LogQuadraticField(ScalarField):
    """
    v(x) = alpha log|x| + beta x_n + gamma |x|^2 on R^n minus the origin.

    Covers the pure log power, the drift field alpha log|x| + 2c x_n - 10c^2|x|^2
    and the auxiliary field alpha log|x| + d x_n + (5 d^2 / 2)|x|^2.
    """

    kind = "log_power"

    def __init__(
        self,
        n: int,
        alpha: float,
        beta: float = 0.0,
        gamma: float = 0.0,
        kind: str = "log_power",
        spec: Optional[FieldSpec] = None,
    ):
        super().__init__(n, spec)
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.gamma = float(gamma)
        self.kind = kind

    def contains(self, x: np.ndarray) -> bool:
        return float(np.linalg.norm(x)) > R_MIN

    def _value(self, x: np.ndarray) -> float:
        r2 = float(x @ x)
        return 0.5 * self.alpha * math.log(r2) + self.beta * x[-1] + self.gamma * r2

    def _analytic_jet(self, x: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        r2 = float(x @ x)
        eye = np.eye(self.n)
        grad = self.alpha * x / r2 + 2.0 * self.gamma * x
        grad[-1] += self.beta
        hess = self.alpha * (eye / r2 - 2.0 * np.outer(x, x) / r2**2) + 2.0 * self.gamma * eye
        return self._value(x), grad, hess


class BarrierField(ScalarField):
    """
    w(x) = 2/(mu-1) log(eps (|x - e_n|^(1-mu) - delta)) for r_min < |x - e_n| < R,
    R = delta^(-1/(mu-1)).
    """

    kind = "barrier_w_delta"

    def __init__(
        self, n: int, mu: float, delta: float, eps: float, spec: Optional[FieldSpec] = None
    ):
        super().__init__(n, spec)
        if not (mu > 1 and delta > 0 and eps > 0):
            raise ParameterError(
                f"barrier needs mu > 1, delta > 0, eps > 0, got mu={mu}, delta={delta}, eps={eps}"
            )
        self.mu = float(mu)
        self.delta = float(delta)
        self.eps = float(eps)
        self.radius = self.delta ** (-1.0 / (self.mu - 1.0))
        self.center = np.zeros(n)
        self.center[-1] = 1.0

    def contains(self, x: np.ndarray) -> bool:
        s = float(np.linalg.norm(x - self.center))
        return R_MIN < s < self.radius

    def _radial(self, s: float) -> Tuple[float, float, float]:
        mu, k = self.mu, 2.0 / (self.mu - 1.0)
        g = s ** (1.0 - mu) - self.delta
        value = k * (math.log(self.eps) + math.log(g))
        ds = -2.0 * s ** (-mu) / g
        dss = 2.0 * (mu * s ** (-mu - 1.0) * g + (1.0 - mu) * s ** (-2.0 * mu)) / g**2
        return value, ds, dss

    def _value(self, x: np.ndarray) -> float:
        return self._radial(float(np.linalg.norm(x - self.center)))[0]

    def _analytic_jet(self, x: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        d = x - self.center
        s = float(np.linalg.norm(d))
        return radial_jet(d, s, *self._radial(s))

    def boundary_ratio(self, s: float) -> float:
        """e^{-w} dw/dx_n on the boundary hyperplane at distance s from e_n."""
        return (
            2.0
            * self.eps ** (-2.0 / (self.mu - 1.0))
            * (1.0 - self.delta * s ** (self.mu - 1.0)) ** (-(self.mu + 1.0) / (self.mu - 1.0))
        )


class OneVariableField(ScalarField):
    """Base for fields that depend on x_n only."""

    def profile(self, t: float) -> Tuple[float, float, float]:
        """(v, v', v'') at x_n = t."""
        raise NotImplementedError

    def t_range(self) -> Tuple[float, float]:
        return -math.inf, math.inf

    def contains(self, x: np.ndarray) -> bool:
        lo, hi = self.t_range()
        return lo < float(x[-1]) < hi

    def _value(self, x: np.ndarray) -> float:
        return self.profile(float(x[-1]))[0]

    def _analytic_jet(self, x: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        v, v1, v2 = self.profile(float(x[-1]))
        grad = np.zeros(self.n)
        grad[-1] = v1
        hess = np.zeros((self.n, self.n))
        hess[-1, -1] = v2
        return v, grad, hess


class MinFSolutionField(OneVariableField):
    """v(x) = 2/(mu-1) log(1 + (mu-1)/2 c x_n), defined where 1 + (mu-1)/2 c x_n > 0."""

    kind = "one_var_min_f"

    def __init__(self, n: int, mu: float, c: float, spec: Optional[FieldSpec] = None):
        super().__init__(n, spec)
        if not mu > 1:
            raise ParameterError(f"one_var_min_f needs mu > 1, got {mu}")
        self.mu = float(mu)
        self.c = float(c)
        self.k = 0.5 * (self.mu - 1.0)

    def t_range(self) -> Tuple[float, float]:
        kc = self.k * self.c
        if kc > 0:
            return -1.0 / kc, math.inf
        if kc < 0:
            return -math.inf, -1.0 / kc
        return -math.inf, math.inf

    def profile(self, t: float) -> Tuple[float, float, float]:
        q = 1.0 + self.k * self.c * t
        return math.log(q) / self.k, self.c / q, -self.k * self.c**2 / q**2


class TabulatedField(OneVariableField):
    """
    v(x) = s(x_n) for the cubic Hermite interpolant s through samples (t_i, v_i, v'_i).

    The domain is the closed sample interval in x_n.
    """

    kind = "one_var_tabulated"

    def __init__(
        self,
        n: int,
        t: Sequence[float],
        v: Sequence[float],
        w: Sequence[float],
        spec: Optional[FieldSpec] = None,
    ):
        super().__init__(n, spec)
        t_arr = np.asarray(t, dtype=float)
        if t_arr.size < 2 or np.any(np.diff(t_arr) <= 0):
            raise ParameterError("tabulated field needs >= 2 strictly increasing sample times")
        if len(v) != t_arr.size or len(w) != t_arr.size:
            raise ParameterError("tabulated field needs t, v and w of equal length")
        self.spline = CubicHermiteSpline(t_arr, np.asarray(v, float), np.asarray(w, float))
        self._d1 = self.spline.derivative(1)
        self._d2 = self.spline.derivative(2)
        self.t0 = float(t_arr[0])
        self.t1 = float(t_arr[-1])

    def contains(self, x: np.ndarray) -> bool:
        return self.t0 <= float(x[-1]) <= self.t1

    def profile(self, t: float) -> Tuple[float, float, float]:
        return float(self.spline(t)), float(self._d1(t)), float(self._d2(t))


class CustomField(ScalarField):
    """
    A user field given by a value-only callback or an expression over x1..xn.

    Jets are always finite differences.
    """

    kind = "custom"
    has_analytic_jet = False

    def __init__(
        self,
        n: int,
        func: Callable[[np.ndarray], float],
        domain: Optional[Callable[[np.ndarray], bool]] = None,
        spec: Optional[FieldSpec] = None,
    ):
        super().__init__(n, spec)
        self.func = func
        self.domain = domain

    def contains(self, x: np.ndarray) -> bool:
        if self.domain is not None and not self.domain(x):
            return False
        try:
            return math.isfinite(float(self.func(x)))
        except (ValueError, ZeroDivisionError, OverflowError, SpecFormatError):
            return False

    def _value(self, x: np.ndarray) -> float:
        return float(self.func(x))


# ----------------------------------------------------------------------------
# Construction from specs
# ----------------------------------------------------------------------------


def _param(spec: FieldSpec, name: str, default: Any = None) -> Any:
    if name in spec.params:
        return spec.params[name]
    if default is not None:
        return default
    raise ParameterError(f"{spec.kind} field requires parameter '{name}'")


def _real(spec: FieldSpec, name: str, default: Optional[float] = None) -> float:
    value = _param(spec, name, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ParameterError(f"{spec.kind} parameter '{name}' must be a finite number")
    return float(value)


def make_field(spec: FieldSpec) -> ScalarField:
    """Build the field described by ``spec``; parameters are validated per kind."""
    n, kind = spec.n, spec.kind
    if kind == "bubble":
        return BubbleField(
            n, _real(spec, "a"), _real(spec, "b"), _param(spec, "xbar", [0.0] * n), spec=spec
        )
    if kind == "log_power":
        return LogQuadraticField(n, _real(spec, "alpha"), spec=spec)
    if kind == "log_power_drift":
        c = _real(spec, "c")
        return LogQuadraticField(
            n, _real(spec, "alpha"), 2.0 * c, -10.0 * c * c, kind=kind, spec=spec
        )
    if kind == "aux_lemma23":
        d = _real(spec, "delta_tilde")
        return LogQuadraticField(n, _real(spec, "alpha"), d, 2.5 * d * d, kind=kind, spec=spec)
    if kind == "barrier_w_delta":
        return BarrierField(
            n, _real(spec, "mu"), _real(spec, "delta"), _real(spec, "eps"), spec=spec
        )
    if kind == "one_var_min_f":
        return MinFSolutionField(n, _real(spec, "mu"), _real(spec, "c"), spec=spec)
    if kind == "one_var_tabulated":
        return TabulatedField(
            n, _param(spec, "t"), _param(spec, "v"), _param(spec, "w"), spec=spec
        )
    if kind == "constant":
        return ConstantField(n, _real(spec, "kappa", 0.0), spec=spec)
    if kind == "linear":
        return LinearField(n, _param(spec, "g"), _real(spec, "kappa", 0.0), spec=spec)
    if kind == "custom":
        expr = parse_expression(_param(spec, "expr"), n, prefix="x", functions=FIELD_FUNCTIONS)
        return CustomField(n, lambda x: expr(list(x)), spec=spec)
    raise ParameterError(f"unknown field kind '{kind}'")


def fd_agreement(v: ScalarField, x: Any) -> Dict[str, float]:
    """Largest component gaps between the analytic and finite-difference jets."""
    exact = jet(v, x, "analytic")
    approx = jet(v, x, "finite_difference")
    return {
        "value": abs(exact.value - approx.value),
        "gradient": float(np.max(np.abs(exact.gradient - approx.gradient))),
        "hessian": float(np.max(np.abs(exact.hessian - approx.hessian))),
    }
