"""Spatiotemporal grid model: grid geometry, capacity rules, demand/supply tensors.

The planning area is an M x N grid of square cells with a fixed number of
equal-length time bins. Rows index the y axis, columns the x axis; the grid
origin is the lower-left corner of cell (0, 0). All cell-to-cell distances
are Euclidean distances between cell centers, in meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

Cell = tuple[int, int]


@dataclass(frozen=True)
class GridSpec:
    """Uniform planar grid with equal square cells and equal time bins."""

    rows: int
    cols: int
    cell_size: float
    origin: tuple[float, float] = (0.0, 0.0)
    time_bins: int = 1
    bin_duration: float = 3600.0

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid must have at least one cell, got {self.rows}x{self.cols}")
        if self.time_bins < 1:
            raise ValueError(f"time_bins must be >= 1, got {self.time_bins}")
        if not self.cell_size > 0:
            raise ValueError(f"cell_size must be positive, got {self.cell_size}")
        if not self.bin_duration > 0:
            raise ValueError(f"bin_duration must be positive, got {self.bin_duration}")

    @property
    def shape(self) -> tuple[int, int]:
        """Spatial (rows, cols) shape of one grid slice."""
        return (self.rows, self.cols)

    @property
    def tensor_shape(self) -> tuple[int, int, int]:
        """(time_bins, rows, cols) shape of a full demand tensor."""
        return (self.time_bins, self.rows, self.cols)

    def in_bounds(self, cell: Cell) -> bool:
        i, j = cell
        return 0 <= i < self.rows and 0 <= j < self.cols

    def cell_of(self, x: float, y: float) -> Cell | None:
        """Map a planar point to its cell, or None when outside the extent.

        Intervals are half-open: a point exactly on a shared edge belongs to
        the cell with the lower index.
        """
        j = math.floor((x - self.origin[0]) / self.cell_size)
        i = math.floor((y - self.origin[1]) / self.cell_size)
        if 0 <= i < self.rows and 0 <= j < self.cols:
            return (i, j)
        return None

    def clamp_to_grid(self, x: float, y: float) -> Cell:
        """Cell containing the point, clamped to the nearest border cell."""
        j = math.floor((x - self.origin[0]) / self.cell_size)
        i = math.floor((y - self.origin[1]) / self.cell_size)
        return (min(max(i, 0), self.rows - 1), min(max(j, 0), self.cols - 1))

    def bin_of(self, seconds: float) -> int | None:
        """Map seconds since the window start to a time bin, or None outside.

        Bins are half-open [start, start + bin_duration).
        """
        if seconds < 0:
            return None
        t = math.floor(seconds / self.bin_duration)
        return t if t < self.time_bins else None

    def cell_center(self, cell: Cell) -> tuple[float, float]:
        i, j = cell
        return (
            self.origin[0] + (j + 0.5) * self.cell_size,
            self.origin[1] + (i + 0.5) * self.cell_size,
        )

    def cell_distance(self, a: Cell, b: Cell) -> float:
        """Center-to-center Euclidean distance in meters."""
        di = a[0] - b[0]
        dj = a[1] - b[1]
        return self.cell_size * math.sqrt(di * di + dj * dj)


@dataclass(frozen=True)
class CapacityPolicy:
    """Service capacity rules: units per site per bin, site budget, reach."""

    per_site_capacity: int
    site_budget: int
    service_radius: float

    def __post_init__(self) -> None:
        if self.per_site_capacity < 1:
            raise ValueError(f"per_site_capacity must be >= 1, got {self.per_site_capacity}")
        if self.site_budget < 1:
            raise ValueError(f"site_budget must be >= 1, got {self.site_budget}")
        if self.service_radius < 0:
            raise ValueError(f"service_radius must be >= 0, got {self.service_radius}")


def demand_tensor(values, spec: GridSpec) -> np.ndarray:
    """Validate and return a T x M x N non-negative integer demand tensor."""
    arr = np.asarray(values)
    if arr.shape != spec.tensor_shape:
        raise ValueError(f"demand shape {arr.shape} does not match grid {spec.tensor_shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == np.floor(arr)):
            raise ValueError("demand entries must be integers")
    arr = arr.astype(np.int64)
    if np.any(arr < 0):
        raise ValueError("demand entries must be non-negative")
    return arr


def vertiport_layout(values, spec: GridSpec) -> np.ndarray:
    """Validate and return an M x N non-negative integer site-count matrix."""
    arr = np.asarray(values)
    if arr.shape != (spec.rows, spec.cols):
        raise ValueError(
            f"layout shape {arr.shape} does not match grid ({spec.rows}, {spec.cols})"
        )
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == np.floor(arr)):
            raise ValueError("layout entries must be integers")
    arr = arr.astype(np.int64)
    if np.any(arr < 0):
        raise ValueError("layout entries must be non-negative")
    return arr


def supply_from_layout(layout: np.ndarray, policy: CapacityPolicy) -> np.ndarray:
    """Per-cell capacity: site count times per-site capacity."""
    layout = np.asarray(layout, dtype=np.int64)
    if np.any(layout < 0):
        raise ValueError("layout entries must be non-negative")
    return layout * policy.per_site_capacity


@dataclass(frozen=True)
class Violation:
    """One violated feasibility constraint, with the offending cell if local."""

    constraint: str  # "granularity" | "negative" | "total"
    cell: Cell | None
    message: str


def validate_supply(
    supply: np.ndarray,
    policy: CapacityPolicy,
    enforce_total: bool = False,
) -> list[Violation]:
    """Check a supply matrix against the capacity feasibility rules.

    Returns one entry per violated constraint; an empty list means feasible.
    The total-capacity check (sum == per_site_capacity * site_budget) only
    runs when enforce_total is set, so partial plans under construction can
    be validated cell-wise.
    """
    supply = np.asarray(supply)
    p = policy.per_site_capacity
    violations: list[Violation] = []
    for i, j in zip(*np.nonzero(supply % p != 0)):
        violations.append(
            Violation(
                "granularity",
                (int(i), int(j)),
                f"supply {supply[i, j]} at ({i}, {j}) is not a multiple of {p}",
            )
        )
    for i, j in zip(*np.nonzero(supply < 0)):
        violations.append(
            Violation("negative", (int(i), int(j)), f"supply {supply[i, j]} at ({i}, {j}) is negative")
        )
    if enforce_total:
        total = int(supply.sum())
        expected = p * policy.site_budget
        if total != expected:
            violations.append(
                Violation("total", None, f"total supply {total} != {p} * {policy.site_budget} = {expected}")
            )
    return violations


@lru_cache(maxsize=128)
def _disk_offsets(cols: int, cell_size: float, radius: float) -> np.ndarray:
    """(di, dj) offsets within radius, sorted by (distance, row-major target).

    The row-major tie-break orders equidistant targets by their cell index,
    which for a fixed grid width reduces to ordering by di * cols + dj.
    """
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    reach = int(radius // cell_size)
    offsets = []
    for di in range(-reach, reach + 1):
        for dj in range(-reach, reach + 1):
            d2 = di * di + dj * dj
            if d2 * cell_size * cell_size <= radius * radius:
                offsets.append((d2, di * cols + dj, di, dj))
    offsets.sort()
    out = np.array([(di, dj) for _, _, di, dj in offsets], dtype=np.int64)
    out.setflags(write=False)  # cached and shared across callers
    return out


def disk_offsets(spec: GridSpec, radius: float) -> np.ndarray:
    """Offsets of all cells within `radius` of a cell, in service order."""
    return _disk_offsets(spec.cols, spec.cell_size, radius)


def disk_mask(spec: GridSpec, radius: float) -> np.ndarray:
    """Square 0/1 kernel marking offsets within `radius`, for convolutions."""
    reach = int(radius // spec.cell_size)
    size = 2 * reach + 1
    mask = np.zeros((size, size), dtype=np.int64)
    for di, dj in disk_offsets(spec, radius):
        mask[di + reach, dj + reach] = 1
    return mask


def neighborhood(spec: GridSpec, cell: Cell, radius: float) -> list[Cell]:
    """In-bounds cells within `radius` of `cell`, nearest first.

    Includes the cell itself; ties are broken by row-major cell index.
    """
    if not spec.in_bounds(cell):
        raise ValueError(f"cell {cell} out of bounds for {spec.rows}x{spec.cols} grid")
    i, j = cell
    cells = []
    for di, dj in disk_offsets(spec, radius):
        ti, tj = i + int(di), j + int(dj)
        if 0 <= ti < spec.rows and 0 <= tj < spec.cols:
            cells.append((ti, tj))
    return cells
