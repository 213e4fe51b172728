"""
Mobius transformations of R^n U {infinity} and the conformal pushforward.

A MobiusMap is an ordered tuple of atoms (translation, dilation, orthogonal
map, sphere inversion) applied first to last. The pushforward
v^phi = v o phi + (1/n) log|J_phi| of a field is built atom by atom, and
analytic jets flow through the exact first and second derivatives of each
atom, so no numerical differentiation happens through a composition.
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import ortho_group

from .exceptions import DomainError, ParameterError, SpecFormatError
from .fields import R_MIN, ScalarField
from .points import INFINITY, ExtendedPoint, as_point, is_infinity

logger = logging.getLogger(__name__)

ORTHOGONALITY_TOL = 1e-12

# (Da, ell, grad ell, hess ell); second derivatives enter via second_contraction
AtomDerivatives = Tuple[np.ndarray, float, np.ndarray, np.ndarray]


class Atom:
    """One elementary Mobius transformation."""

    name = "atom"

    def apply(self, x: ExtendedPoint) -> ExtendedPoint:
        raise NotImplementedError

    def log_conformal_factor(self, x: np.ndarray) -> float:
        """(1/n) log|J| at a finite point whose image is finite."""
        raise NotImplementedError

    def derivatives(self, x: np.ndarray) -> AtomDerivatives:
        raise NotImplementedError

    def second_contraction(self, x: np.ndarray, g: np.ndarray) -> np.ndarray:
        """sum_i g_i D^2 a_i at x."""
        return np.zeros((x.size, x.size))

    def to_dict(self) -> Dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class Translation(Atom):
    t: Tuple[float, ...]
    name = "translation"

    def apply(self, x: ExtendedPoint) -> ExtendedPoint:
        if is_infinity(x):
            return INFINITY
        return np.asarray(x, float) + np.asarray(self.t)

    def log_conformal_factor(self, x: np.ndarray) -> float:
        return 0.0

    def derivatives(self, x: np.ndarray) -> AtomDerivatives:
        n = x.size
        return np.eye(n), 0.0, np.zeros(n), np.zeros((n, n))

    def to_dict(self) -> Dict[str, Any]:
        return {"translation": {"t": list(self.t)}}


@dataclass(frozen=True)
class Dilation(Atom):
    s: float
    name = "dilation"

    def __post_init__(self) -> None:
        if not self.s > 0:
            raise ParameterError(f"dilation factor must be positive, got {self.s}")

    def apply(self, x: ExtendedPoint) -> ExtendedPoint:
        if is_infinity(x):
            return INFINITY
        return self.s * np.asarray(x, float)

    def log_conformal_factor(self, x: np.ndarray) -> float:
        return math.log(self.s)

    def derivatives(self, x: np.ndarray) -> AtomDerivatives:
        n = x.size
        return self.s * np.eye(n), math.log(self.s), np.zeros(n), np.zeros((n, n))

    def to_dict(self) -> Dict[str, Any]:
        return {"dilation": {"s": self.s}}


@dataclass(frozen=True)
class Orthogonal(Atom):
    O: Tuple[Tuple[float, ...], ...]
    name = "orthogonal"

    def __post_init__(self) -> None:
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ParameterError("orthogonal atom needs a square matrix")
        if np.max(np.abs(m.T @ m - np.eye(m.shape[0]))) > ORTHOGONALITY_TOL:
            raise ParameterError("orthogonal atom matrix fails |O^T O - I| <= 1e-12")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.O, dtype=float)

    def apply(self, x: ExtendedPoint) -> ExtendedPoint:
        if is_infinity(x):
            return INFINITY
        return self.matrix @ np.asarray(x, float)

    def log_conformal_factor(self, x: np.ndarray) -> float:
        return 0.0

    def derivatives(self, x: np.ndarray) -> AtomDerivatives:
        n = x.size
        return self.matrix, 0.0, np.zeros(n), np.zeros((n, n))

    def to_dict(self) -> Dict[str, Any]:
        return {"orthogonal": {"O": [list(row) for row in self.O]}}


@dataclass(frozen=True)
class Inversion(Atom):
    """y -> c + radius^2 (y - c)/|y - c|^2; swaps c and infinity."""

    center: Tuple[float, ...]
    radius: float
    name = "inversion"

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ParameterError(f"inversion radius must be positive, got {self.radius}")

    def apply(self, x: ExtendedPoint) -> ExtendedPoint:
        c = np.asarray(self.center)
        if is_infinity(x):
            return c.copy()
        z = np.asarray(x, float) - c
        rho = float(z @ z)
        if rho == 0.0:
            return INFINITY
        return c + self.radius**2 * z / rho

    def log_conformal_factor(self, x: np.ndarray) -> float:
        z = x - np.asarray(self.center)
        return 2.0 * math.log(self.radius) - math.log(float(z @ z))

    def derivatives(self, x: np.ndarray) -> AtomDerivatives:
        n = x.size
        z = x - np.asarray(self.center)
        rho = float(z @ z)
        zz = np.outer(z, z)
        da = (self.radius**2 / rho) * (np.eye(n) - 2.0 * zz / rho)
        ell = 2.0 * math.log(self.radius) - math.log(rho)
        grad_ell = -2.0 * z / rho
        hess_ell = -2.0 * np.eye(n) / rho + 4.0 * zz / rho**2
        return da, ell, grad_ell, hess_ell

    def second_contraction(self, x: np.ndarray, g: np.ndarray) -> np.ndarray:
        z = x - np.asarray(self.center)
        rho = float(z @ z)
        gz = float(g @ z)
        lam2 = self.radius**2
        return (lam2 / rho**2) * (
            -2.0 * (np.outer(g, z) + np.outer(z, g)) - 2.0 * gz * np.eye(x.size)
        ) + 8.0 * lam2 * gz * np.outer(z, z) / rho**3

    def to_dict(self) -> Dict[str, Any]:
        return {"inversion": {"center": list(self.center), "radius": self.radius}}


def translation(t: Sequence[float]) -> Translation:
    return Translation(tuple(float(c) for c in t))


def dilation(s: float) -> Dilation:
    return Dilation(float(s))


def orthogonal(O: Union[np.ndarray, Sequence[Sequence[float]]]) -> Orthogonal:
    m = np.asarray(O, dtype=float)
    return Orthogonal(tuple(tuple(float(c) for c in row) for row in m))


def inversion(center: Sequence[float], radius: float) -> Inversion:
    return Inversion(tuple(float(c) for c in center), float(radius))


@dataclass(frozen=True)
class MobiusMap:
    """Ordered atoms, applied first to last."""

    atoms: Tuple[Atom, ...] = ()

    def __call__(self, x: ExtendedPoint) -> ExtendedPoint:
        return mobius_apply(self, x)

    def to_list(self) -> List[Dict[str, Any]]:
        return [atom.to_dict() for atom in self.atoms]

    def dumps(self) -> str:
        return json.dumps(self.to_list(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_list(cls, data: Any) -> "MobiusMap":
        if not isinstance(data, list):
            raise SpecFormatError("a Mobius map must be a JSON list of atoms")
        atoms: List[Atom] = []
        for entry in data:
            if not isinstance(entry, dict) or len(entry) != 1:
                raise SpecFormatError(f"each atom must be a single-key object, got {entry!r}")
            (name, body), = entry.items()
            try:
                if name == "translation":
                    atoms.append(translation(body["t"]))
                elif name == "dilation":
                    atoms.append(dilation(body["s"]))
                elif name == "orthogonal":
                    atoms.append(orthogonal(body["O"]))
                elif name == "inversion":
                    atoms.append(inversion(body["center"], body["radius"]))
                else:
                    raise SpecFormatError(f"unknown atom '{name}'")
            except (KeyError, TypeError) as e:
                raise SpecFormatError(f"malformed {name} atom: {e}") from e
        return cls(tuple(atoms))

    @classmethod
    def loads(cls, text: str) -> "MobiusMap":
        try:
            return cls.from_list(json.loads(text))
        except json.JSONDecodeError as e:
            raise SpecFormatError(f"invalid JSON in map file: {e}") from e


IDENTITY = MobiusMap(())


def load_map(path: Union[str, Path]) -> MobiusMap:
    try:
        return MobiusMap.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise SpecFormatError(f"cannot read map file {path}: {e}") from e


def mobius_apply(phi: MobiusMap, x: ExtendedPoint) -> ExtendedPoint:
    """Apply phi to a point of the compactified space."""
    y = x if is_infinity(x) else as_point(x)
    for atom in phi.atoms:
        y = atom.apply(y)
    return y


def compose(f: MobiusMap, g: MobiusMap) -> MobiusMap:
    """f o g: apply g, then f."""
    return MobiusMap(g.atoms + f.atoms)


def jacobian_log_det(phi: MobiusMap, x: Any) -> float:
    """(1/n) log|J_phi(x)| by the chain rule over the atoms."""
    y = as_point(x)
    total = 0.0
    for atom in phi.atoms:
        image = atom.apply(y)
        if is_infinity(image):
            raise DomainError(f"{atom.name} sends {y.tolist()} to infinity")
        total += atom.log_conformal_factor(y)
        y = image
    return total


class AtomPullback(ScalarField):
    """F^a(y) = F(a(y)) + (1/n) log|J_a(y)| for a single atom a."""

    kind = "pushforward"

    def __init__(self, base: ScalarField, atom: Atom):
        super().__init__(base.n)
        self.base = base
        self.atom = atom
        self.has_analytic_jet = base.has_analytic_jet

    def contains(self, x: np.ndarray) -> bool:
        if isinstance(self.atom, Inversion):
            if float(np.linalg.norm(x - np.asarray(self.atom.center))) <= R_MIN:
                return False
        image = self.atom.apply(x)
        return not is_infinity(image) and self.base.contains(image)

    def _value(self, x: np.ndarray) -> float:
        return self.base._value(self.atom.apply(x)) + self.atom.log_conformal_factor(x)

    def _analytic_jet(self, x: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
        image = self.atom.apply(x)
        u, g, h = self.base._analytic_jet(image)
        da, ell, grad_ell, hess_ell = self.atom.derivatives(x)
        value = u + ell
        grad = da.T @ g + grad_ell
        hess = da.T @ h @ da + self.atom.second_contraction(x, g) + hess_ell
        return value, grad, 0.5 * (hess + hess.T)


def pushforward(v: ScalarField, phi: MobiusMap) -> ScalarField:
    """The field v^phi = v o phi + (1/n) log|J_phi|."""
    result = v
    for atom in reversed(phi.atoms):
        result = AtomPullback(result, atom)
    return result


def kelvin(v: ScalarField, x: Any, lam: float) -> ScalarField:
    """
    Kelvin transform v^{x,lam}(y) = v(x + lam^2 (y-x)/|y-x|^2) + 2 log(lam/|y-x|)
    about a boundary point x.
    """
    center = as_point(x, v.n)
    if not lam > 0:
        raise ParameterError(f"Kelvin radius must be positive, got {lam}")
    if abs(center[-1]) > 1e-12:
        raise ParameterError(f"Kelvin center must lie on the boundary x_n = 0, got {center.tolist()}")
    return pushforward(v, MobiusMap((inversion(center, lam),)))


def normalize_gradient_map(
    q: Sequence[float], lam: float = 1.0, Oprime: Optional[np.ndarray] = None
) -> MobiusMap:
    """
    psi(x) = O(lam^2 (x - xbar)/|x - xbar|^2 + lam^2 xbar/|xbar|^2), with
    O = diag(O', 1) and xbar = (lam^2/2) O^T (q, 0).

    psi fixes 0 and the half space, and kills the tangential gradient at 0
    of any field whose tangential gradient at 0 is q.
    """
    q_arr = np.asarray(q, dtype=float).reshape(-1)
    if not np.any(q_arr):
        raise ParameterError("tangential gradient q must be nonzero")
    if lam == 0:
        raise ParameterError("lam must be nonzero")
    m = q_arr.size
    if Oprime is None:
        Oprime = np.eye(m)
    Oprime = np.asarray(Oprime, dtype=float)
    if Oprime.shape != (m, m):
        raise ParameterError(f"Oprime must be {m}x{m}")
    O = np.eye(m + 1)
    O[:m, :m] = Oprime
    xbar = 0.5 * lam**2 * (O.T @ np.append(q_arr, 0.0))
    shift = lam**2 * xbar / float(xbar @ xbar) - xbar
    return MobiusMap((inversion(xbar, abs(lam)), translation(shift), orthogonal(O)))


def normalized_gradient_closed_form(
    grad0: np.ndarray, lam: float = 1.0, Oprime: Optional[np.ndarray] = None
) -> np.ndarray:
    """Gradient at 0 of v^psi predicted from the gradient of v at 0."""
    grad0 = np.asarray(grad0, float)
    m = grad0.size - 1
    if Oprime is None:
        Oprime = np.eye(m)
    O = np.eye(m + 1)
    O[:m, :m] = Oprime
    xbar = 0.5 * lam**2 * (O.T @ np.append(grad0[:m], 0.0))
    r2 = float(xbar @ xbar)
    unit = xbar / math.sqrt(r2)
    return 2.0 * xbar / r2 + (lam**2 / r2) * (np.eye(m + 1) - 2.0 * np.outer(unit, unit)) @ (O.T @ grad0)


def preserves_half_space(phi: MobiusMap, samples: Sequence[np.ndarray], tol: float = 1e-12) -> bool:
    """Sampled check that phi maps the open half space into itself."""
    for x in samples:
        image = mobius_apply(phi, x)
        if is_infinity(image) or image[-1] <= -tol:
            return False
    return True


def random_map(n: int, rng: np.random.Generator, max_atoms: int = 3) -> MobiusMap:
    """A map of 1..max_atoms random atoms, used by the invariance sweeps."""
    atoms: List[Atom] = []
    for _ in range(int(rng.integers(1, max_atoms + 1))):
        choice = int(rng.integers(4))
        if choice == 0:
            atoms.append(translation(rng.normal(size=n)))
        elif choice == 1:
            atoms.append(dilation(float(np.exp(rng.uniform(-1.0, 1.0)))))
        elif choice == 2:
            atoms.append(orthogonal(ortho_group.rvs(dim=n, random_state=rng)))
        else:
            atoms.append(inversion(rng.normal(size=n), float(rng.uniform(0.5, 2.0))))
    return MobiusMap(tuple(atoms))
