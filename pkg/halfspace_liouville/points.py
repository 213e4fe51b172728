"""
Points of the half space and the point at infinity.

Finite points are plain float64 numpy vectors of length n >= 2. The point
at infinity is the ``INFINITY`` singleton; it is never a large float.
"""

from typing import Iterable, Union

import numpy as np

from .exceptions import InputError

BOUNDARY_TOL = 1e-12


class PointAtInfinity:
    """The added point of the compactification R^n U {infinity}."""

    _instance = None

    def __new__(cls) -> "PointAtInfinity":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"

    def __reduce__(self) -> str:
        return "INFINITY"


INFINITY = PointAtInfinity()

ExtendedPoint = Union[np.ndarray, PointAtInfinity]


def as_point(coords: Union[Iterable[float], np.ndarray], n: int = 0) -> np.ndarray:
    """Validate and convert coordinates to a finite point of R^n."""
    x = np.array(coords, dtype=float).reshape(-1)
    if x.size < 2:
        raise InputError(f"points need dimension n >= 2, got {x.size}")
    if n and x.size != n:
        raise InputError(f"expected a point of dimension {n}, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise InputError(f"point has non-finite coordinates: {x.tolist()}")
    return x


def is_infinity(x: object) -> bool:
    return x is INFINITY


def on_boundary(x: np.ndarray, tol: float = BOUNDARY_TOL) -> bool:
    """True when x lies on the boundary hyperplane x_n = 0."""
    return abs(float(x[-1])) <= tol


def parse_point(text: str) -> np.ndarray:
    """Parse a comma separated coordinate list such as ``0,0,1``."""
    try:
        coords = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as e:
        raise InputError(f"cannot parse point '{text}': {e}") from e
    return as_point(coords)
