"""
Ground-truth initial conditions for the four reconstruction tests.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from config import Config, letter_strokes
from models.grid import SpatialGrid

logger = logging.getLogger(__name__)

SOURCE_KINDS = ('bump', 'two_bumps', 'letter_Y', 'letter_lambda')

# Nodes within this many cells of the measurement boundary must carry f = 0
CLEARANCE_CELLS = 2

Point = Tuple[float, float]
Segment = Tuple[Point, Point]


@dataclass(frozen=True)
class SourceSpec:
    """Geometry of a test source.

    Bumps use ``centers`` and ``radius``; letters use ``strokes`` (segments)
    and ``half_width``.
    """

    kind: str
    centers: Tuple[Point, ...] = ()
    radius: float = 1.0
    strokes: Tuple[Segment, ...] = ()
    half_width: float = Config.LETTER_HALF_WIDTH
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"Unknown source kind {self.kind!r}; choose from {SOURCE_KINDS}")
        if self.kind in ('bump', 'two_bumps') and (not self.centers or self.radius <= 0):
            raise ValueError(f"{self.kind} needs centers and a positive radius")
        if self.kind.startswith('letter') and (not self.strokes or self.half_width <= 0):
            raise ValueError(f"{self.kind} needs strokes and a positive half-width")

    @property
    def is_two_inclusions(self) -> bool:
        return self.kind == 'two_bumps'

    def extent(self) -> float:
        """Largest |x| or |y| reached by the support."""
        if self.kind in ('bump', 'two_bumps'):
            return max(max(abs(cx), abs(cy)) for cx, cy in self.centers) + self.radius
        coords = [abs(v) for segment in self.strokes for point in segment for v in point]
        return max(coords) + self.half_width


def source_for_test(test: int) -> SourceSpec:
    """Source of Test 1-4."""
    if test == 1:
        return SourceSpec('bump', centers=((0.0, 0.0),), radius=1.0)
    if test == 2:
        return SourceSpec('two_bumps', centers=((-1.0, 0.0), (1.0, 0.0)), radius=0.8)
    if test == 3:
        return SourceSpec('letter_Y', strokes=letter_strokes('letter_Y'))
    if test == 4:
        return SourceSpec('letter_lambda', strokes=letter_strokes('letter_lambda'))
    raise ValueError(f"Unknown test {test}; choose from 1-4")


def smooth_bump(X: np.ndarray, Y: np.ndarray, center: Point, radius: float) -> np.ndarray:
    """exp(-r^2/(r^2 - |x - c|^2) + 1) inside the disk, 0 outside."""
    d2 = (X - center[0]) ** 2 + (Y - center[1]) ** 2
    inside = d2 < radius ** 2
    gap = np.where(inside, radius ** 2 - d2, 1.0)
    return np.where(inside, np.exp(-radius ** 2 / gap + 1.0), 0.0)


def segment_distance(X: np.ndarray, Y: np.ndarray, segment: Segment) -> np.ndarray:
    (x0, y0), (x1, y1) = segment
    dx, dy = x1 - x0, y1 - y0
    length2 = dx * dx + dy * dy
    if length2 == 0.0:
        return np.hypot(X - x0, Y - y0)
    s = np.clip(((X - x0) * dx + (Y - y0) * dy) / length2, 0.0, 1.0)
    return np.hypot(X - (x0 + s * dx), Y - (y0 + s * dy))


def evaluate_source(spec: SourceSpec, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Pointwise value of the source at coordinates (X, Y)."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if spec.kind in ('bump', 'two_bumps'):
        # Disks are disjoint, so the pieces add up without overlap
        values = sum(smooth_bump(X, Y, center, spec.radius) for center in spec.centers)
    else:
        distance = np.min([segment_distance(X, Y, seg) for seg in spec.strokes], axis=0)
        values = (distance <= spec.half_width).astype(float)
    return spec.amplitude * values


def sample_source(spec: SourceSpec, grid: SpatialGrid, clearance: Optional[int] = CLEARANCE_CELLS) -> np.ndarray:
    """
    Sample a source on the grid nodes, values[i-1, j-1].

    Args:
        spec: Source geometry
        grid: Measurement grid
        clearance: Number of boundary cells that must stay zero (None skips the check)

    Returns:
        2-D array of nodal values

    Raises:
        ValueError: If the support reaches the boundary of the measurement square
    """
    if spec.extent() >= grid.R:
        raise ValueError(f"Source {spec.kind} reaches |x| = {spec.extent():.3f}, outside (-{grid.R}, {grid.R})^2")

    X, Y = grid.mesh()
    values = evaluate_source(spec, X, Y)

    if clearance:
        rim = np.ones_like(values, dtype=bool)
        inner = slice(clearance + 1, -(clearance + 1))
        rim[inner, inner] = False
        if np.any(values[rim] != 0.0):
            raise ValueError(f"Source {spec.kind} is nonzero within {clearance} cells of the boundary")

    logger.debug(f"Sampled {spec.kind} source, max {values.max():.4f}")
    return values
