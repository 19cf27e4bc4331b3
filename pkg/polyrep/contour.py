"""Plot data for planar representations: sign grids and marching-squares zero segments.

Values are computed in floating point and carry no accuracy guarantee; the export is meant for figures.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from polyrep.errors import PreconditionError
from polyrep.expr import Expr
from polyrep.interval import Box

logger = logging.getLogger(__name__)

Segment = tuple[float, float, float, float]

# Edges of a cell as pairs of corner indices; corners are (i, j), (i+1, j), (i+1, j+1), (i, j+1).
_EDGES = ((0, 1), (1, 2), (2, 3), (3, 0))


@dataclass
class ContourData:
    xs: np.ndarray
    ys: np.ndarray
    values: list[np.ndarray]
    segments: list[list[Segment]]


def sample_contour(polys: Sequence[Expr], window: Box, resolution: int) -> ContourData:
    """Evaluate every polynomial on a ``resolution x resolution`` grid over ``window``.

    Raises:
        PreconditionError: If the polynomials are not planar or the resolution is below 2.
    """
    if window.dim != 2 or any(p.dim != 2 for p in polys):
        raise PreconditionError("Contour export needs a representation in R^2")
    if resolution < 2:
        raise PreconditionError(f"Contour resolution must be at least 2, got {resolution}")
    (x_side, y_side) = window.sides
    xs = np.linspace(float(x_side.lo), float(x_side.hi), resolution)
    ys = np.linspace(float(y_side.lo), float(y_side.hi), resolution)
    grid_x, grid_y = np.meshgrid(xs, ys, indexing="ij")
    points = np.column_stack([grid_x.ravel(), grid_y.ravel()])
    values = [np.asarray(p.evaluate_float(points), dtype=float).reshape(resolution, resolution) for p in polys]
    segments = [zero_segments(xs, ys, v) for v in values]
    logger.info("Contour grid %dx%d: %s zero segments", resolution, resolution, [len(s) for s in segments])
    return ContourData(xs, ys, values, segments)


def _crossing(p0: tuple[float, float], p1: tuple[float, float], v0: float, v1: float) -> tuple[float, float]:
    t = v0 / (v0 - v1)
    return p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])


def zero_segments(xs: np.ndarray, ys: np.ndarray, values: np.ndarray) -> list[Segment]:
    """Marching squares on the ``values >= 0`` classification; saddle cells pair crossings in edge order."""
    inside = values >= 0
    segments: list[Segment] = []
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            corners = ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1))
            flags = [inside[c] for c in corners]
            if all(flags) or not any(flags):
                continue
            crossings = []
            for a, b in _EDGES:
                if flags[a] != flags[b]:
                    pa, pb = corners[a], corners[b]
                    crossings.append(
                        _crossing(
                            (xs[pa[0]], ys[pa[1]]),
                            (xs[pb[0]], ys[pb[1]]),
                            float(values[pa]),
                            float(values[pb]),
                        )
                    )
            for k in range(0, len(crossings) - 1, 2):
                (x0, y0), (x1, y1) = crossings[k], crossings[k + 1]
                segments.append((float(x0), float(y0), float(x1), float(y1)))
    return segments


def write_sign_grid(data: ContourData, path: Path) -> None:
    """One row per polynomial and grid node: ``poly, i, j, x, y, sign``."""
    with Path(path).open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["poly", "i", "j", "x", "y", "sign"])
        for index, values in enumerate(data.values):
            signs = np.sign(values).astype(int)
            for i, x in enumerate(data.xs):
                for j, y in enumerate(data.ys):
                    writer.writerow([index, i, j, f"{x:.12g}", f"{y:.12g}", signs[i, j]])


def write_segments(data: ContourData, path: Path) -> None:
    with Path(path).open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["poly", "x0", "y0", "x1", "y1"])
        for index, segments in enumerate(data.segments):
            for seg in segments:
                writer.writerow([index, *(f"{v:.12g}" for v in seg)])
