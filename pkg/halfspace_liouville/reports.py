"""
Report writers: JSON reports, trajectory CSV with a JSON sidecar, and an
SVG polyline of a trajectory. Files are written to a temporary file in the
target directory and moved into place with os.replace.
"""

import csv
import io
import json
import logging
import math
import os
import tempfile
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from . import __version__
from .ode import CSV_HEADER, OdeTrajectory

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _clean(value: Any) -> Any:
    """JSON-safe copy: numpy scalars and arrays to Python, non-finite floats to strings."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "unbounded" if x > 0 else "-unbounded"
        return x
    return value


def build_report(command: str, body: Dict[str, Any], timestamp: bool = True) -> Dict[str, Any]:
    report: Dict[str, Any] = {"command": command, "version": __version__}
    if timestamp:
        report["generated_at"] = datetime.now().isoformat(timespec="seconds")
    report.update(body)
    return _clean(report)


def dumps_report(report: Dict[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def atomic_write(path: PathLike, text: str) -> Path:
    """Write text to path via a temporary file in the same directory."""
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    directory.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile(
        mode="w", encoding="utf-8", dir=directory, prefix=f".{target.name}.", suffix=".tmp",
        delete=False, newline="",
    ) as temp_file:
        temp_file.write(text)
        temp_path = temp_file.name
    try:
        os.replace(temp_path, target)
    except OSError:
        os.unlink(temp_path)
        raise
    logger.debug("wrote %s", target)
    return target


def write_json(path: PathLike, report: Dict[str, Any]) -> Path:
    return atomic_write(path, dumps_report(report))


def trajectory_csv(traj: OdeTrajectory) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in traj.rows():
        writer.writerow([repr(x) for x in row])
    return buffer.getvalue()


def sidecar_path(csv_path: PathLike) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_trajectory(
    csv_path: PathLike, traj: OdeTrajectory, extra: Optional[Dict[str, Any]] = None, timestamp: bool = True
) -> Path:
    """CSV rows plus a sidecar JSON holding classification and parameters."""
    atomic_write(csv_path, trajectory_csv(traj))
    body = traj.to_dict()
    if extra:
        body.update(extra)
    body["csv"] = Path(csv_path).name
    return write_json(sidecar_path(csv_path), build_report("ode", body, timestamp))


def trajectory_svg(traj: OdeTrajectory, width: int = 640, height: int = 400, margin: int = 40) -> str:
    """A single (t, v) polyline with the axis ranges in the title."""
    t, v = np.asarray(traj.t, float), np.asarray(traj.v, float)
    t_lo, t_hi = float(t.min()), float(t.max())
    v_lo, v_hi = float(v.min()), float(v.max())
    t_span = (t_hi - t_lo) or 1.0
    v_span = (v_hi - v_lo) or 1.0
    xs = margin + (t - t_lo) / t_span * (width - 2 * margin)
    ys = height - margin - (v - v_lo) / v_span * (height - 2 * margin)
    points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    title = f"v(t), t in [{t_lo:.4g}, {t_hi:.4g}], v in [{v_lo:.4g}, {v_hi:.4g}], {traj.classification}"
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f"  <title>{title}</title>\n"
        f'  <rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="#999"/>\n'
        f'  <polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="{points}"/>\n'
        "</svg>\n"
    )


def write_svg(path: PathLike, traj: OdeTrajectory) -> Path:
    return atomic_write(path, trajectory_svg(traj))
