"""
One-variable reduction: v = v(x_n) solving f(lambda(A[v])) = e^{-pv} on
x_n > 0 with v'(0) = c e^{v(0)}.

The model case lambda_1 + mu lambda_2 = e^{-pv} is integrated in the
variables phi = e^v, w = v' where it reads

    phi' = phi w,    w' = -theta w^2 - phi^{-2q},
    theta = (mu - 1)/2,  q = (p - 2)/2,

and conserves I = phi^{2 theta} w^2 - phi^{-2(q - theta)}/(q - theta)
(2 log phi replaces the last term when q = theta). General operators are
integrated in (v, w) by inverting f for lambda_1 at every right-hand-side
evaluation.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .config import get_section
from .cones import EXTERIOR, Cone, SymFunc, cone_margin, cone_status, format_mu
from .exceptions import DomainError, InputError, IntegrationError, InversionError, ParameterError
from .fields import ScalarField
from .hessian import one_var_spectrum

logger = logging.getLogger(__name__)

_ODE = get_section("ode")
RTOL = float(_ODE["rtol"])
ATOL = float(_ODE["atol"])
BLOWUP_W = float(_ODE["blowup_w"])
BLOWUP_PHI_LOW = float(_ODE["blowup_phi_low"])
BLOWUP_PHI_HIGH = float(_ODE["blowup_phi_high"])
STEP_UNDERFLOW = float(_ODE["step_underflow"])
MAX_STEPS = int(_ODE["max_steps"])
BRACKET_DOUBLINGS = int(_ODE["bracket_doublings"])
DRIFT_TOL = float(_ODE["drift_tol"])
THRESHOLD_BAND = float(_ODE["threshold_band"])

GLOBAL = "global"
BLOWUP = "blowup"

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)


@dataclass(frozen=True)
class OdeParams:
    mu: float
    p_exp: float

    def __post_init__(self) -> None:
        if not self.mu > 1:
            raise ParameterError(f"the model needs mu > 1, got {self.mu}")

    @property
    def theta(self) -> float:
        return 0.5 * (self.mu - 1.0)

    @property
    def q_exp(self) -> float:
        return 0.5 * (self.p_exp - 2.0)

    def to_dict(self) -> Dict[str, float]:
        return {"mu": self.mu, "p": self.p_exp, "theta": self.theta, "q": self.q_exp}


@dataclass(frozen=True)
class OdeState:
    t: float
    phi: float
    w: float

    @property
    def v(self) -> float:
        return math.log(self.phi)


@dataclass
class OdeTrajectory:
    """Accepted integration steps plus classification and monitoring data."""

    t: np.ndarray
    v: np.ndarray
    w: np.ndarray
    classification: str
    params: Optional[OdeParams] = None
    first_integral: Optional[np.ndarray] = None
    drift: Optional[np.ndarray] = None
    max_drift: float = 0.0
    cone_margin: Optional[np.ndarray] = None
    cone_exit_t: Optional[float] = None
    t_plus: Optional[float] = None
    t_plus_bracket: Optional[Tuple[float, float]] = None
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def phi(self) -> np.ndarray:
        return np.exp(self.v)

    @property
    def samples(self) -> List[OdeState]:
        return [OdeState(float(t), math.exp(v), float(w)) for t, v, w in zip(self.t, self.v, self.w)]

    @property
    def cone_exit(self) -> bool:
        return self.cone_exit_t is not None

    def interpolate(self, t: Any) -> np.ndarray:
        """Cubic Hermite dense output of v between accepted steps."""
        spline = CubicHermiteSpline(self.t, self.v, self.w)
        return spline(t)

    def rows(self) -> List[List[float]]:
        n = self.t.size
        nan = np.full(n, math.nan)
        first = self.first_integral if self.first_integral is not None else nan
        drift = self.drift if self.drift is not None else nan
        margin = self.cone_margin if self.cone_margin is not None else nan
        return [
            [float(self.t[i]), float(self.v[i]), float(self.w[i]), float(math.exp(self.v[i])),
             float(first[i]), float(drift[i]), float(margin[i])]
            for i in range(n)
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "classification": self.classification,
            "t_plus": self.t_plus,
            "t_plus_bracket": list(self.t_plus_bracket) if self.t_plus_bracket else None,
            "max_drift": self.max_drift,
            "cone_exit": self.cone_exit,
            "cone_exit_t": self.cone_exit_t,
            "steps": int(self.t.size),
            "t_end": float(self.t[-1]),
            "params": self.params.to_dict() if self.params else None,
            **self.meta,
        }


CSV_HEADER = ("t", "v", "w", "phi", "I", "drift", "cone_margin")


# ----------------------------------------------------------------------------
# Closed forms
# ----------------------------------------------------------------------------


def first_integral(params: OdeParams, s: OdeState) -> float:
    if not s.phi > 0:
        raise DomainError(f"first integral needs phi > 0, got {s.phi}")
    theta, gap = params.theta, params.q_exp - params.theta
    kinetic = s.phi ** (2.0 * theta) * s.w * s.w
    if gap == 0.0:
        return kinetic + 2.0 * math.log(s.phi)
    return kinetic - s.phi ** (-2.0 * gap) / gap


def threshold_w0(mu: float, p: float, v0: float) -> float:
    """Smallest w0 > 0 giving a global solution: sqrt(2) (p-mu-1)^{-1/2} e^{-(p-2) v0/2}."""
    if not mu > 1:
        raise DomainError(f"threshold needs mu > 1, got {mu}")
    if not p > mu + 1:
        raise DomainError(f"threshold is undefined for p <= mu + 1 (mu={mu}, p={p})")
    return math.sqrt(2.0) * (p - mu - 1.0) ** -0.5 * math.exp(-(p - 2.0) * v0 / 2.0)


def threshold_v0_bound(mu: float, p: float, c: float) -> float:
    """v0 above which the Neumann slope c e^{v0} meets the threshold (c > 0)."""
    if not c > 0:
        raise DomainError(f"the v0 bound needs c > 0, got {c}")
    if not (mu > 1 and p > mu + 1):
        raise DomainError(f"the v0 bound needs mu > 1 and p > mu + 1 (mu={mu}, p={p})")
    return -(2.0 * math.log(c) + math.log(p - mu - 1.0) - math.log(2.0)) / p


# ----------------------------------------------------------------------------
# Dormand-Prince 5(4)
# ----------------------------------------------------------------------------


@dataclass
class _Run:
    ts: List[float]
    ys: List[np.ndarray]
    status: str
    h_last: float


def _rk_step(
    rhs: Callable[[float, np.ndarray], np.ndarray], t: float, y: np.ndarray, k1: np.ndarray, h: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    ks = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * k for a, k in zip(_A[i], ks))
        ks.append(rhs(t + _C[i] * h, yi))
    y_new = y + h * sum(a * k for a, k in zip(_A[6], ks))
    err = h * sum(e * k for e, k in zip(_E, ks))
    return y_new, err, ks[6]


def dopri54(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: Sequence[float],
    t_max: float,
    escaped: Callable[[np.ndarray], bool],
    rtol: float = RTOL,
    atol: float = ATOL,
    max_steps: int = MAX_STEPS,
) -> _Run:
    """
    Adaptive embedded Runge-Kutta integration with FSAL stages.

    ``escaped`` only marks a candidate: integration carries on past it.
    The run stops at t_max ("completed") or with a blow-up certificate
    ("blowup") once the accepted state is escaped and the step has shrunk
    below step_underflow * max(1, t). Underflow on a state that is not
    escaped raises IntegrationError.
    """
    t = float(t0)
    y = np.array(y0, dtype=float)
    ts, ys = [t], [y.copy()]
    k1 = rhs(t, y)
    h = min(1e-3, t_max - t)
    flagged = False
    for _ in range(max_steps):
        floor = STEP_UNDERFLOW * max(1.0, abs(t))
        if t_max - t <= floor:
            return _Run(ts, ys, "completed", h)
        if h < floor:
            if escaped(y):
                return _Run(ts, ys, "blowup", h)
            raise IntegrationError(f"step size underflow at t={t:.6g} without a blow-up certificate")
        h = min(h, t_max - t)
        try:
            with np.errstate(all="ignore"):
                y_new, err, k7 = _rk_step(rhs, t, y, k1, h)
            finite = bool(np.all(np.isfinite(y_new)) and np.all(np.isfinite(err)))
        except (InversionError, ArithmeticError, ValueError):
            finite = False
        if not finite:
            logger.debug("non-finite trial step at t=%.6g, h=%.3g", t, h)
            h *= 0.25
            continue
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
        if err_norm <= 1.0:
            t += h
            y = y_new
            k1 = k7
            ts.append(t)
            ys.append(y.copy())
            if not flagged and escaped(y):
                flagged = True
                logger.debug("escape thresholds crossed at t=%.6g, waiting for step underflow", t)
            factor = 5.0 if err_norm == 0.0 else min(5.0, max(0.2, 0.9 * err_norm ** -0.2))
        else:
            logger.debug("rejected step at t=%.6g, h=%.3g, err=%.3g", t, h, err_norm)
            factor = max(0.2, 0.9 * err_norm ** -0.2)
        h *= factor
    raise IntegrationError(f"maximum step count {max_steps} reached at t={t:.6g}")


def _max_drift(drift: np.ndarray) -> float:
    # states at the blow-up certificate can overflow the integral
    finite = drift[np.isfinite(drift)]
    return float(np.max(finite)) if finite.size else math.nan


def _classify(run: _Run) -> Tuple[str, Optional[float], Optional[Tuple[float, float]]]:
    if run.status == "completed":
        return GLOBAL, None, None
    t_prev = run.ts[-2] if len(run.ts) > 1 else run.ts[-1]
    return BLOWUP, run.ts[-1], (t_prev, run.ts[-1])


# ----------------------------------------------------------------------------
# Model equation
# ----------------------------------------------------------------------------


def integrate_model(
    params: OdeParams,
    v0: float,
    w0: float,
    t_max: float,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> OdeTrajectory:
    """Integrate v'' + theta v'^2 + e^{(2-p)v} = 0 from (v0, w0) on [0, t_max]."""
    if not t_max > 0:
        raise ParameterError(f"t_max must be positive, got {t_max}")
    theta, q2 = params.theta, 2.0 * params.q_exp

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        phi, w = y
        if phi <= 0:
            return np.array([math.nan, math.nan])
        return np.array([phi * w, -theta * w * w - phi ** (-q2)])

    def escaped(y: np.ndarray) -> bool:
        return abs(y[1]) > BLOWUP_W or not BLOWUP_PHI_LOW <= y[0] <= BLOWUP_PHI_HIGH

    run = dopri54(rhs, 0.0, [math.exp(v0), w0], t_max, escaped, rtol, atol)
    classification, t_plus, bracket = _classify(run)
    ys = np.array(run.ys)
    phi, w = ys[:, 0], ys[:, 1]
    i0 = first_integral(params, OdeState(0.0, phi[0], w[0]))
    with np.errstate(all="ignore"):
        integral = np.array([first_integral(params, OdeState(t, a, b)) for t, a, b in zip(run.ts, phi, w)])
        drift = np.abs(integral - i0) / (1.0 + abs(i0) + phi ** (2.0 * theta) * w * w)
    traj = OdeTrajectory(
        t=np.array(run.ts),
        v=np.log(phi),
        w=w,
        classification=classification,
        params=params,
        first_integral=integral,
        drift=drift,
        max_drift=_max_drift(drift),
        t_plus=t_plus,
        t_plus_bracket=bracket,
        meta={"kind": "model", "v0": v0, "w0": w0, "t_max": t_max, "I0": i0, "rtol": rtol, "atol": atol},
    )
    logger.info(
        "model (mu=%g, p=%g) v0=%g w0=%g: %s%s, max drift %.2e",
        params.mu, params.p_exp, v0, w0, classification,
        f" at t={t_plus:.6g}" if t_plus is not None else "", traj.max_drift,
    )
    return traj


def expected_classification(params: OdeParams, v0: float, w0: float) -> str:
    """Blow-up exactly when w0 <= 0 or the first integral is negative."""
    i0 = first_integral(params, OdeState(0.0, math.exp(v0), w0))
    return BLOWUP if (w0 <= 0 or i0 < 0) else GLOBAL


# ----------------------------------------------------------------------------
# General operators
# ----------------------------------------------------------------------------


def invert_lambda1(f: SymFunc, lam2: float, target: float) -> float:
    """Solve f(lam1, lam2, ..., lam2) = target for lam1 (f increasing in lam1)."""
    def h(lam1: float) -> float:
        return f.raw([lam1] + [lam2] * (f.n - 1)) - target

    width = max(1.0, abs(target), abs(lam2))
    for doubling in range(BRACKET_DOUBLINGS + 1):
        lo, hi = lam2 - width, lam2 + width
        h_lo, h_hi = h(lo), h(hi)
        if h_lo <= 0.0 <= h_hi:
            if h_lo == 0.0:
                return lo
            if h_hi == 0.0:
                return hi
            return float(brentq(h, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))
        width *= 2.0
    raise InversionError(
        f"no bracket for lambda_1 with lambda_2={lam2:.6g}, target={target:.6g} "
        f"after {BRACKET_DOUBLINGS} doublings"
    )


def integrate_general(
    f: SymFunc,
    c: Cone,
    p: float,
    bc: float,
    v0: float,
    t_max: float,
    rtol: float = RTOL,
    atol: float = ATOL,
    params: Optional[OdeParams] = None,
) -> OdeTrajectory:
    """
    Integrate f(lambda(A[v])) = e^{-pv} with v(0) = v0, v'(0) = bc e^{v0}.

    Each right-hand side inverts f for lambda_1 given lambda_2 = -w^2 e^{-2v}/2
    and returns v'' = -lambda_1 e^{2v} + w^2/2. Leaving the cone is recorded,
    not fatal.
    """
    if not t_max > 0:
        raise ParameterError(f"t_max must be positive, got {t_max}")
    n = f.n

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        v, w = y
        e2v = math.exp(2.0 * v)
        lam2 = -0.5 * w * w / e2v
        lam1 = invert_lambda1(f, lam2, math.exp(-p * v))
        return np.array([w, -lam1 * e2v + 0.5 * w * w])

    log_low, log_high = math.log(BLOWUP_PHI_LOW), math.log(BLOWUP_PHI_HIGH)

    def escaped(y: np.ndarray) -> bool:
        return abs(y[1]) > BLOWUP_W or not log_low <= y[0] <= log_high

    w0 = bc * math.exp(v0)
    run = dopri54(rhs, 0.0, [v0, w0], t_max, escaped, rtol, atol)
    classification, t_plus, bracket = _classify(run)
    ys = np.array(run.ys)
    v, w = ys[:, 0], ys[:, 1]

    margins = np.empty(v.size)
    exit_t: Optional[float] = None
    for i in range(v.size):
        dv2 = rhs(run.ts[i], ys[i])[1]
        spectrum = one_var_spectrum(n, v[i], w[i], dv2)
        margins[i] = cone_margin(c, spectrum)
        if exit_t is None and cone_status(c, spectrum) == EXTERIOR:
            exit_t = run.ts[i]
    if exit_t is not None:
        logger.warning("trajectory left %s at t=%.6g", c.name, exit_t)

    integral = drift = None
    max_drift = 0.0
    if params is not None and params.q_exp != params.theta:
        with np.errstate(all="ignore"):
            phi = np.exp(v)
            integral = np.array([
                first_integral(params, OdeState(0.0, a, b)) if a > 0 else math.nan for a, b in zip(phi, w)
            ])
            drift = np.abs(integral - integral[0]) / (
                1.0 + abs(integral[0]) + phi ** (2.0 * params.theta) * w * w
            )
        max_drift = _max_drift(drift)

    traj = OdeTrajectory(
        t=np.array(run.ts),
        v=v,
        w=w,
        classification=classification,
        params=params,
        first_integral=integral,
        drift=drift,
        max_drift=max_drift,
        cone_margin=margins,
        cone_exit_t=exit_t,
        t_plus=t_plus,
        t_plus_bracket=bracket,
        meta={
            "kind": "general", "f": f.name, "cone": c.name, "p": p, "bc": bc, "v0": v0,
            "w0": w0, "t_max": t_max, "rtol": rtol, "atol": atol,
        },
    )
    logger.info("general %s on %s: %s, cone exit %s", f.name, c.name, classification, traj.cone_exit)
    return traj


def trajectory_from_field(
    v: ScalarField, t0: float, t1: float, count: int, cone: Optional[Cone] = None
) -> OdeTrajectory:
    """Sample a one-variable field along the x_n axis as a trajectory."""
    if count < 2 or not t1 > t0:
        raise InputError("need count >= 2 and t1 > t0")
    ts = np.linspace(t0, t1, count)
    vals = np.empty(count)
    slopes = np.empty(count)
    margins = np.full(count, math.nan)
    exit_t: Optional[float] = None
    for i, t in enumerate(ts):
        x = np.zeros(v.n)
        x[-1] = t
        j = v.jet(x)
        vals[i], slopes[i] = j.value, j.gradient[-1]
        if cone is not None:
            spectrum = one_var_spectrum(v.n, j.value, j.gradient[-1], j.hessian[-1, -1])
            margins[i] = cone_margin(cone, spectrum)
            if exit_t is None and cone_status(cone, spectrum) == EXTERIOR:
                exit_t = float(t)
    return OdeTrajectory(
        t=ts, v=vals, w=slopes, classification=GLOBAL,
        cone_margin=margins if cone is not None else None, cone_exit_t=exit_t,
        meta={"kind": "field", "field": v.kind},
    )


@dataclass
class ConvexityReport:
    mu: float
    quantity: str
    t: List[float]
    second_differences: List[float]
    cone_margin: List[float]
    all_nonpositive: bool
    all_negative: bool
    max_second_difference: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mu": format_mu(self.mu),
            "quantity": self.quantity,
            "all_nonpositive": self.all_nonpositive,
            "all_negative": self.all_negative,
            "max_second_difference": self.max_second_difference,
            "samples": len(self.t),
        }


def convexity_check(mu: float, traj: OdeTrajectory, tol: float = 1e-9) -> ConvexityReport:
    """
    Sign of theta (e^{theta v})'' with theta = (mu-1)/2, or of v'' when mu = 1,
    from nonuniform second differences at interior samples.
    """
    if traj.t.size < 5:
        raise InputError("convexity check needs at least 5 samples")
    theta = 0.5 * (mu - 1.0)
    if theta == 0.0:
        y = traj.v
        quantity = "v''"
    else:
        y = theta * np.exp(theta * traj.v)
        quantity = "theta (e^{theta v})''"
    h1 = np.diff(traj.t)[:-1]
    h2 = np.diff(traj.t)[1:]
    d2 = 2.0 * ((y[2:] - y[1:-1]) / h2 - (y[1:-1] - y[:-2]) / h1) / (h1 + h2)
    scale = tol * max(1.0, float(np.max(np.abs(y))))
    margin = traj.cone_margin[1:-1] if traj.cone_margin is not None else np.full(d2.size, math.nan)
    return ConvexityReport(
        mu=mu,
        quantity=quantity,
        t=traj.t[1:-1].tolist(),
        second_differences=d2.tolist(),
        cone_margin=margin.tolist(),
        all_nonpositive=bool(np.all(d2 <= scale)),
        all_negative=bool(np.all(d2 < -scale)),
        max_second_difference=float(np.max(d2)),
    )
