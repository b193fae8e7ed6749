"""Workpiece height field: grid spec, min-z retention, trajectory minima.

The workpiece top surface is a regular grid of (m+1) x (n+1) nodes with
spacing ``spacing_mm``; node (i, j) sits at (x_min + i*spacing, y_min +
j*spacing). Each node stores the lowest z any trajectory point has deposited
in its cell; untouched cells keep the initial stock height, which doubles as
the uncut sentinel.

Cell membership uses half-open intervals via rounding, so a point exactly on a
shared cell boundary belongs to the higher-index cell and every point maps to
exactly one cell. Points outside the grid are skipped, never clamped onto
border cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class GridSpec:
    """Regular grid geometry. ``m`` and ``n`` are cell counts; nodes are m+1 by n+1."""

    spacing_mm: float
    x_min_mm: float
    y_min_mm: float
    m: int
    n: int

    def __post_init__(self) -> None:
        if self.spacing_mm <= 0:
            raise DomainError(f"grid spacing must be > 0, got {self.spacing_mm}")
        if self.m < 1 or self.n < 1:
            raise DomainError(f"grid must have at least one cell per axis, got m={self.m}, n={self.n}")

    @classmethod
    def from_extents(
        cls,
        spacing_mm: float,
        x_range_mm: tuple[float, float],
        y_range_mm: tuple[float, float],
    ) -> "GridSpec":
        if spacing_mm <= 0:
            raise DomainError(f"grid spacing must be > 0, got {spacing_mm}")
        m = round((x_range_mm[1] - x_range_mm[0]) / spacing_mm)
        n = round((y_range_mm[1] - y_range_mm[0]) / spacing_mm)
        if m < 1 or n < 1:
            raise DomainError(
                f"grid extents {x_range_mm} x {y_range_mm} span less than one cell "
                f"at spacing {spacing_mm}"
            )
        return cls(spacing_mm, x_range_mm[0], y_range_mm[0], m, n)

    @property
    def x_max_mm(self) -> float:
        return self.x_min_mm + self.m * self.spacing_mm

    @property
    def y_max_mm(self) -> float:
        return self.y_min_mm + self.n * self.spacing_mm

    @property
    def node_count(self) -> int:
        return (self.m + 1) * (self.n + 1)

    def x_coords(self) -> np.ndarray:
        return self.x_min_mm + self.spacing_mm * np.arange(self.m + 1)

    def y_coords(self) -> np.ndarray:
        return self.y_min_mm + self.spacing_mm * np.arange(self.n + 1)


def locate(x_mm: float, y_mm: float, spec: GridSpec) -> tuple[int, int] | None:
    """Grid cell containing (x, y), or None when the point falls outside.

    Index formula: i = floor((x - x_min)/spacing + 1/2), likewise j.
    """
    if not (math.isfinite(x_mm) and math.isfinite(y_mm)):
        raise DomainError(f"non-finite coordinates ({x_mm}, {y_mm})")
    i = math.floor((x_mm - spec.x_min_mm) / spec.spacing_mm + 0.5)
    j = math.floor((y_mm - spec.y_min_mm) / spec.spacing_mm + 0.5)
    if 0 <= i <= spec.m and 0 <= j <= spec.n:
        return (i, j)
    return None


class HeightField:
    """Mutable min-z height field over a GridSpec.

    The backing array is one contiguous row-major float64 buffer of length
    (m+1)*(n+1), allocated once at construction and never resized; index
    (i, j) maps to flat offset i*(n+1) + j. Single-writer: concurrent
    simulation uses one private field per worker and merges with
    ``merge_min``.
    """

    __slots__ = ("spec", "initial_height_mm", "heights")

    def __init__(self, spec: GridSpec, initial_height_mm: float, heights: np.ndarray | None = None):
        self.spec = spec
        self.initial_height_mm = float(initial_height_mm)
        if heights is None:
            self.heights = np.full(spec.node_count, self.initial_height_mm, dtype=np.float64)
        else:
            if heights.shape != (spec.node_count,):
                raise DomainError(
                    f"heights buffer has {heights.shape}, expected ({spec.node_count},)"
                )
            self.heights = np.ascontiguousarray(heights, dtype=np.float64)

    def as_array(self) -> np.ndarray:
        """(m+1, n+1) view of the height buffer; axis 0 is x (i), axis 1 is y (j)."""
        return self.heights.reshape(self.spec.m + 1, self.spec.n + 1)

    def height_at(self, i: int, j: int) -> float:
        self._check_index(i, j)
        return float(self.heights[i * (self.spec.n + 1) + j])

    def machined_mask(self) -> np.ndarray:
        """(m+1, n+1) boolean array, True where the cell was cut below stock."""
        return self.as_array() < self.initial_height_mm

    def machined_cell_count(self) -> int:
        return int(np.count_nonzero(self.heights < self.initial_height_mm))

    def merge_min(self, other: "HeightField") -> None:
        if other.spec != self.spec:
            raise DomainError("cannot merge height fields with different grids")
        np.minimum(self.heights, other.heights, out=self.heights)

    def copy(self) -> "HeightField":
        return HeightField(self.spec, self.initial_height_mm, self.heights.copy())

    def _check_index(self, i: int, j: int) -> None:
        if not (0 <= i <= self.spec.m and 0 <= j <= self.spec.n):
            raise DomainError(
                f"grid index ({i}, {j}) outside [0, {self.spec.m}] x [0, {self.spec.n}]"
            )


def update_min(field: HeightField, idx: tuple[int, int], z_mm: float) -> bool:
    """Lower the cell at ``idx`` to ``z_mm`` if strictly below the stored height.

    Returns True when the cell changed. Out-of-range indices are rejected,
    never written.
    """
    i, j = idx
    field._check_index(i, j)
    flat = i * (field.spec.n + 1) + j
    if z_mm < field.heights[flat]:
        field.heights[flat] = z_mm
        return True
    return False


class TrajectoryRecord:
    """Per-(time step, tooth) minimum-z edge point in workpiece coordinates.

    Entries are ordered by time, ties by tooth index ascending. Storage is
    reserved up front; ``append`` past capacity is an error.
    """

    __slots__ = ("t_s", "tooth", "x_mm", "y_mm", "z_mm", "_cursor")

    def __init__(self, capacity: int):
        if capacity < 0:
            raise DomainError(f"capacity must be >= 0, got {capacity}")
        self.t_s = np.empty(capacity, dtype=np.float64)
        self.tooth = np.empty(capacity, dtype=np.int64)
        self.x_mm = np.empty(capacity, dtype=np.float64)
        self.y_mm = np.empty(capacity, dtype=np.float64)
        self.z_mm = np.empty(capacity, dtype=np.float64)
        self._cursor = 0

    def __len__(self) -> int:
        return self._cursor

    def append(self, t_s: float, tooth: int, x_mm: float, y_mm: float, z_mm: float) -> None:
        c = self._cursor
        if c >= self.t_s.shape[0]:
            raise DomainError("trajectory record capacity exceeded")
        self.t_s[c] = t_s
        self.tooth[c] = tooth
        self.x_mm[c] = x_mm
        self.y_mm[c] = y_mm
        self.z_mm[c] = z_mm
        self._cursor = c + 1

    def extend_block(
        self,
        t_s: np.ndarray,
        tooth: np.ndarray,
        x_mm: np.ndarray,
        y_mm: np.ndarray,
        z_mm: np.ndarray,
    ) -> None:
        c = self._cursor
        k = t_s.shape[0]
        if c + k > self.t_s.shape[0]:
            raise DomainError("trajectory record capacity exceeded")
        self.t_s[c : c + k] = t_s
        self.tooth[c : c + k] = tooth
        self.x_mm[c : c + k] = x_mm
        self.y_mm[c : c + k] = y_mm
        self.z_mm[c : c + k] = z_mm
        self._cursor = c + k

    def equals(self, other: "TrajectoryRecord") -> bool:
        if len(self) != len(other):
            return False
        c = self._cursor
        return (
            np.array_equal(self.t_s[:c], other.t_s[:c])
            and np.array_equal(self.tooth[:c], other.tooth[:c])
            and np.array_equal(self.x_mm[:c], other.x_mm[:c])
            and np.array_equal(self.y_mm[:c], other.y_mm[:c])
            and np.array_equal(self.z_mm[:c], other.z_mm[:c])
        )


def record_trajectory(
    record: TrajectoryRecord,
    t_s: float,
    tooth: int,
    x_mm: np.ndarray,
    y_mm: np.ndarray,
    z_mm: np.ndarray,
) -> None:
    """Append the minimum-z point among the supplied edge points.

    Ties are broken by the smallest edge-point index.
    """
    if len(z_mm) == 0:
        raise DomainError("record_trajectory needs at least one edge point")
    p = int(np.argmin(z_mm))
    record.append(t_s, tooth, float(x_mm[p]), float(y_mm[p]), float(z_mm[p]))
