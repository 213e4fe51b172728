"""
The Mobius Hessian A[v] = e^{-2v}(-D^2 v + Dv (x) Dv - |Dv|^2 I / 2), its
spectrum, the closed-form radial and one-variable spectra, boundary data
and the Ricci/Schouten eigenvalue map.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from .config import get_section
from .exceptions import DomainError, InputError, ParameterError
from .fields import Jet

logger = logging.getLogger(__name__)

_HESSIAN = get_section("hessian")
SYMMETRY_TOL = float(_HESSIAN["symmetry_tol"])
JACOBI_MAX_SWEEPS = int(_HESSIAN["jacobi_max_sweeps"])
BOUNDARY_TOL = float(_HESSIAN["boundary_tol"])
MAX_JACOBI_DIMENSION = int(_HESSIAN["max_jacobi_dimension"])

CONVENTIONS = ("neumann", "geometric")
RICCI_DIRECTIONS = ("schouten_to_ricci", "ricci_to_schouten")


def conformal_hessian(j: Jet) -> np.ndarray:
    """A[v] at the jet's point."""
    g = j.gradient
    m = -j.hessian + np.outer(g, g) - 0.5 * float(g @ g) * np.eye(j.n)
    a = math.exp(-2.0 * j.value) * m
    return 0.5 * (a + a.T)


def w_tensor(j: Jet) -> np.ndarray:
    """W[v] = e^{2v} A[v]."""
    g = j.gradient
    w = -j.hessian + np.outer(g, g) - 0.5 * float(g @ g) * np.eye(j.n)
    return 0.5 * (w + w.T)


def sort_desc(values: Sequence[float]) -> np.ndarray:
    return np.sort(np.asarray(values, dtype=float))[::-1]


def jacobi_eigh(M: np.ndarray, max_sweeps: int = JACOBI_MAX_SWEEPS) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cyclic Jacobi rotations on a symmetric matrix.

    Returns (eigenvalues, eigenvectors as columns), unsorted. Sweeps follow
    the fixed row-major (p, q) order.
    """
    a = np.array(M, dtype=float)
    n = a.shape[0]
    vecs = np.eye(n)
    scale = float(np.linalg.norm(a))
    if scale == 0.0:
        return np.zeros(n), vecs
    for sweep in range(max_sweeps):
        off = math.sqrt(max(float(np.sum(a * a) - np.sum(np.diag(a) ** 2)), 0.0))
        if off <= n * np.finfo(float).eps * scale:
            logger.debug("Jacobi converged after %d sweeps", sweep)
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                v_p, v_q = vecs[:, p].copy(), vecs[:, q].copy()
                vecs[:, p] = c * v_p - s * v_q
                vecs[:, q] = s * v_p + c * v_q
    else:
        logger.warning("Jacobi iteration hit the sweep cap (%d)", max_sweeps)
    return np.diag(a).copy(), vecs


def check_symmetric(M: np.ndarray, tol: float = SYMMETRY_TOL) -> np.ndarray:
    m = np.asarray(M, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"expected a square matrix, got shape {m.shape}")
    gap = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if gap > tol * max(1.0, float(np.max(np.abs(m)))):
        raise InputError(f"matrix is not symmetric (max |M - M^T| = {gap:.3e})")
    return m


def eigenvalues(M: np.ndarray, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Spectrum of a symmetric matrix, sorted descending."""
    m = check_symmetric(M, tol)
    if m.shape[0] > MAX_JACOBI_DIMENSION:
        logger.debug("dimension %d above Jacobi limit, using LAPACK", m.shape[0])
        return sort_desc(np.linalg.eigvalsh(m))
    vals, _ = jacobi_eigh(0.5 * (m + m.T))
    return sort_desc(vals)


def eigen_residual(M: np.ndarray) -> float:
    """max_k |M q_k - lam_k q_k| / max(1, |M|) over the Jacobi pairs."""
    m = check_symmetric(M)
    vals, vecs = jacobi_eigh(m)
    res = np.linalg.norm(m @ vecs - vecs * vals, axis=0)
    return float(np.max(res)) / max(1.0, float(np.linalg.norm(m, 2)))


def hessian_eigenvalues(j: Jet) -> np.ndarray:
    return eigenvalues(conformal_hessian(j))


def one_var_eigenvalues(v: float, v1: float, v2: float) -> Tuple[float, float]:
    """(lam1, lam2) of A[v] for v = v(x_n); lam2 has multiplicity n-1."""
    e = math.exp(-2.0 * v)
    return (-v2 + 0.5 * v1 * v1) * e, -0.5 * v1 * v1 * e


def one_var_spectrum(n: int, v: float, v1: float, v2: float) -> np.ndarray:
    lam1, lam2 = one_var_eigenvalues(v, v1, v2)
    return sort_desc([lam1] + [lam2] * (n - 1))


def radial_eigenvalues(r: float, v: float, v1: float, v2: float, n: int) -> np.ndarray:
    """Sorted spectrum of A[v] for v = v(|x|) at radius r."""
    if not r > 0:
        raise DomainError(f"radial eigenvalues need r > 0, got {r}")
    e = math.exp(-2.0 * v)
    lam1 = e * (-v2 + 0.5 * v1 * v1)
    lam_t = e * (-v1 / r - 0.5 * v1 * v1)
    return sort_desc([lam1] + [lam_t] * (n - 1))


def boundary_values(j: Jet, convention: str) -> float:
    """
    Boundary datum at a point of x_n = 0.

    ``neumann`` returns c = e^{-v} dv/dx_n; ``geometric`` returns the mean
    curvature h = -c.
    """
    if convention not in CONVENTIONS:
        raise ParameterError(f"convention must be one of {CONVENTIONS}, got '{convention}'")
    if abs(float(j.point[-1])) > BOUNDARY_TOL:
        raise DomainError(f"point {j.point.tolist()} is off the boundary hyperplane")
    c = math.exp(-j.value) * float(j.gradient[-1])
    return c if convention == "neumann" else -c


@dataclass(frozen=True)
class RicciMap:
    """lam(Ric) = T lam(A) with T = (n-2) I + e (x) e, n >= 3."""

    n: int
    T: np.ndarray = field(init=False, repr=False, compare=False)
    T_inv: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n < 3:
            raise DomainError(f"the Ricci map needs n >= 3, got {self.n}")
        n = self.n
        ones = np.ones((n, n))
        object.__setattr__(self, "T", (n - 2.0) * np.eye(n) + ones)
        object.__setattr__(
            self, "T_inv", (np.eye(n) - ones / (2.0 * n - 2.0)) / (n - 2.0)
        )


def ricci_transform(lams: Sequence[float], direction: str) -> np.ndarray:
    """Apply T (schouten_to_ricci) or T^-1 (ricci_to_schouten) and re-sort."""
    if direction not in RICCI_DIRECTIONS:
        raise ParameterError(f"direction must be one of {RICCI_DIRECTIONS}, got '{direction}'")
    vec = np.asarray(lams, dtype=float)
    rmap = RicciMap(vec.size)
    matrix = rmap.T if direction == "schouten_to_ricci" else rmap.T_inv
    return sort_desc(matrix @ vec)
