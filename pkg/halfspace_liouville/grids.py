"""
Deterministic sample grids in the closed half space.

A grid is a tensor lattice over a box clipped to x_n >= 0, so the layer
x_n = 0 is sampled exactly whenever the box touches the boundary, plus a
seeded scrambled Halton scatter over the same box. Points inside any
excluded ball are dropped.
"""

import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import qmc

from .config import get_section
from .exceptions import InputError, SpecFormatError

logger = logging.getLogger(__name__)

_GRIDS = get_section("grids")
DEFAULT_RESOLUTION = int(_GRIDS["resolution"])
DEFAULT_HALTON_COUNT = int(_GRIDS["halton_count"])
DEFAULT_SEED = int(_GRIDS["seed"])
SHELL_DIRECTIONS = int(_GRIDS["shell_directions"])

Ball = Tuple[Tuple[float, ...], float]


@dataclass(frozen=True)
class GridSpec:
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    resolution: Tuple[int, ...]
    excluded: Tuple[Ball, ...] = ()
    halton_count: int = DEFAULT_HALTON_COUNT
    seed: int = DEFAULT_SEED
    _points: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        n = len(self.lower)
        if n < 2 or len(self.upper) != n:
            raise InputError("grid corners must share a dimension n >= 2")
        if len(self.resolution) != n:
            raise InputError(f"grid resolution needs {n} entries")
        if any(r < 2 for r in self.resolution):
            raise InputError("grid resolution must be >= 2 per axis")
        if any(not lo < hi for lo, hi in zip(self.lower, self.upper)):
            raise InputError("grid box needs lower < upper on every axis")
        if not self.upper[-1] > 0:
            raise InputError("grid box does not meet the half space x_n > 0")
        if self.halton_count < 0:
            raise InputError("halton_count must be nonnegative")
        for center, radius in self.excluded:
            if len(center) != n or not radius > 0:
                raise InputError("excluded balls need an n-vector center and a positive radius")

    @property
    def n(self) -> int:
        return len(self.lower)

    @property
    def clipped_lower(self) -> np.ndarray:
        lo = np.array(self.lower, dtype=float)
        lo[-1] = max(lo[-1], 0.0)
        return lo

    def lattice(self) -> np.ndarray:
        lo, hi = self.clipped_lower, np.array(self.upper, dtype=float)
        axes = [np.linspace(a, b, r) for a, b, r in zip(lo, hi, self.resolution)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def scatter(self) -> np.ndarray:
        if self.halton_count == 0:
            return np.empty((0, self.n))
        sampler = qmc.Halton(d=self.n, scramble=True, seed=self.seed)
        unit = sampler.random(self.halton_count)
        return qmc.scale(unit, self.clipped_lower, np.array(self.upper, dtype=float))

    def points(self) -> np.ndarray:
        """Lattice then scatter, with excluded balls removed."""
        if self._points is not None:
            return self._points
        pts = np.vstack([self.lattice(), self.scatter()])
        keep = np.ones(len(pts), dtype=bool)
        for center, radius in self.excluded:
            keep &= np.linalg.norm(pts - np.asarray(center), axis=1) >= radius
        pts = pts[keep]
        object.__setattr__(self, "_points", pts)
        logger.debug("grid with %d points (%d excluded)", len(pts), int(np.sum(~keep)))
        return pts

    def boundary_points(self) -> np.ndarray:
        pts = self.points()
        return pts[pts[:, -1] == 0.0]

    def interior_points(self) -> np.ndarray:
        pts = self.points()
        return pts[pts[:, -1] > 0.0]

    def excluding(self, center: Sequence[float], radius: float) -> "GridSpec":
        """The same grid with one more excluded ball."""
        ball = (tuple(float(c) for c in center), float(radius))
        return replace(self, excluded=self.excluded + (ball,), _points=None)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lower": list(self.lower),
            "upper": list(self.upper),
            "resolution": list(self.resolution),
            "excluded": [{"center": list(c), "radius": r} for c, r in self.excluded],
            "halton_count": self.halton_count,
            "seed": self.seed,
            "point_count": int(len(self.points())),
        }

    @classmethod
    def from_dict(cls, data: Any) -> "GridSpec":
        if not isinstance(data, dict):
            raise SpecFormatError("grid file must hold a JSON object")
        try:
            lower = tuple(float(x) for x in data["lower"])
            upper = tuple(float(x) for x in data["upper"])
            res = data.get("resolution", DEFAULT_RESOLUTION)
            resolution = tuple(int(r) for r in res) if isinstance(res, list) else (int(res),) * len(lower)
            excluded = tuple(
                (tuple(float(c) for c in ball["center"]), float(ball["radius"]))
                for ball in data.get("excluded", [])
            )
            return cls(
                lower=lower,
                upper=upper,
                resolution=resolution,
                excluded=excluded,
                halton_count=int(data.get("halton_count", DEFAULT_HALTON_COUNT)),
                seed=int(data.get("seed", DEFAULT_SEED)),
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, InputError):
                raise
            raise SpecFormatError(f"malformed grid spec: {e}") from e


def load_grid(path: Union[str, Path]) -> GridSpec:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise SpecFormatError(f"cannot read grid file {path}: {e}") from e
    return GridSpec.from_dict(data)


def default_grid(
    n: int,
    half_width: float = 4.0,
    height: float = 4.0,
    resolution: int = DEFAULT_RESOLUTION,
    seed: int = DEFAULT_SEED,
) -> GridSpec:
    """Box [-w, w]^(n-1) x [0, h] with the configured lattice and scatter."""
    return GridSpec(
        lower=(-half_width,) * (n - 1) + (0.0,),
        upper=(half_width,) * (n - 1) + (height,),
        resolution=(resolution,) * n,
        seed=seed,
    )


def hemisphere_directions(n: int, count: int = SHELL_DIRECTIONS, seed: int = DEFAULT_SEED) -> np.ndarray:
    """
    Unit vectors with non-negative last coordinate: the coordinate axes
    +-e_i (i < n), e_n, and ``count`` Halton directions.
    """
    dirs: List[np.ndarray] = []
    for i in range(n - 1):
        for sign in (1.0, -1.0):
            e = np.zeros(n)
            e[i] = sign
            dirs.append(e)
    top = np.zeros(n)
    top[-1] = 1.0
    dirs.append(top)
    if count > 0:
        raw = qmc.Halton(d=n, scramble=True, seed=seed).random(count) * 2.0 - 1.0
        raw[:, -1] = np.abs(raw[:, -1])
        norms = np.linalg.norm(raw, axis=1)
        for d, r in zip(raw, norms):
            if r > 1e-6:
                dirs.append(d / r)
    return np.array(dirs)


def ball_samples(
    n: int, radius: float, count: int, seed: int = DEFAULT_SEED, boundary: bool = False
) -> np.ndarray:
    """
    Seeded points of the half ball B_radius(0) minus the origin; with
    ``boundary`` the points lie on x_n = 0 instead.
    """
    unit = qmc.Halton(d=n + 1, scramble=True, seed=seed).random(count)
    dirs = unit[:, :n] * 2.0 - 1.0
    if boundary:
        dirs[:, -1] = 0.0
    else:
        dirs[:, -1] = np.abs(dirs[:, -1]) + 1e-3
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    radii = radius * (0.05 + 0.9 * unit[:, n])
    return dirs * radii[:, None]


def annulus_samples(
    center: Sequence[float], inner: float, outer: float, count: int, seed: int = DEFAULT_SEED
) -> np.ndarray:
    """Seeded points with inner < |x - center| < outer and x_n > 0."""
    c = np.asarray(center, dtype=float)
    n = c.size
    unit = qmc.Halton(d=n + 1, scramble=True, seed=seed).random(count)
    dirs = unit[:, :n] * 2.0 - 1.0
    dirs[:, -1] = np.abs(dirs[:, -1]) + 1e-3
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    # log-uniform radii keep samples near the inner sphere
    radii = inner * np.exp(math.log(outer / inner) * (0.02 + 0.96 * unit[:, n]))
    return c + dirs * radii[:, None]
