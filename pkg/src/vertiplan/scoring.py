"""Strategy score rasters for interactive site evaluation.

Four normalized M x N layers, each grading every cell as a candidate for the
next station: unmet-demand pressure, coverage gain, proximity to ground
transit, and construction cost (high value = expensive; the synthesis layer
weights it negatively).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .grid import Cell, GridSpec, disk_mask
from .matching import match
from .optimizer import aggregate_and_smooth

DEFAULT_TRAVEL_SPEED = 15.0  # m/s; cancels under normalization, kept for readability

STRATEGIES = ("demand", "coverage", "connectivity", "cost")


@dataclass(frozen=True)
class CostRasters:
    """Construction cost ingredients, one raster per factor."""

    obstacle_density: np.ndarray
    population_density: np.ndarray
    rent: np.ndarray

    def __post_init__(self) -> None:
        shapes = {
            np.asarray(self.obstacle_density).shape,
            np.asarray(self.population_density).shape,
            np.asarray(self.rent).shape,
        }
        if len(shapes) != 1:
            raise ValueError(f"cost rasters disagree on shape: {sorted(shapes)}")


def normalize(matrix: np.ndarray) -> np.ndarray:
    """Min-max rescale to [0, 1]; a constant matrix maps to all zeros."""
    matrix = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix has non-finite entries")
    low = matrix.min()
    span = matrix.max() - low
    if span == 0:
        return np.zeros_like(matrix)
    return (matrix - low) / span


def distilled_from_supply(supply: np.ndarray) -> np.ndarray:
    """Reinterpret an optimized supply matrix as a static single-bin demand tensor.

    The optimized network is a compressed picture of where service is worth
    standing; treating it as demand lets interactive scoring run one cheap
    match instead of a full multi-bin pass.
    """
    supply = np.asarray(supply, dtype=np.int64)
    if supply.ndim != 2:
        raise ValueError(f"expected an M x N supply matrix, got shape {supply.shape}")
    return supply[np.newaxis].copy()


def score_demand(
    user_supply: np.ndarray,
    distilled_demand: np.ndarray,
    spec: GridSpec,
    radius: float,
    kernel_radius: int | None = None,
) -> np.ndarray:
    """Smoothed residual demand left after matching against the user's plan."""
    distilled_demand = np.asarray(distilled_demand)
    if distilled_demand.ndim != 3 or distilled_demand.shape[0] != 1:
        raise ValueError(
            f"distilled demand must be a single-bin tensor, got shape {distilled_demand.shape}"
        )
    if kernel_radius is None:
        kernel_radius = int(radius // spec.cell_size)
    result = match(distilled_demand, user_supply, spec, radius)
    smoothed = aggregate_and_smooth(result.final_residual_demand, kernel_radius)
    return normalize(smoothed)


def score_coverage(user_supply: np.ndarray, spec: GridSpec, radius: float) -> np.ndarray:
    """How many currently uncovered cells a station at each cell would reach.

    A cell counts as covered when any supplied cell lies within the service
    radius of it. All cells count, demand-bearing or not.
    """
    supply = np.asarray(user_supply)
    if supply.shape != spec.shape:
        raise ValueError(f"supply shape {supply.shape} does not match grid {spec.shape}")
    mask = disk_mask(spec, radius)
    supplied = (supply > 0).astype(np.int64)
    covered = convolve2d(supplied, mask, mode="same", boundary="fill", fillvalue=0) > 0
    uncovered = (~covered).astype(np.int64)
    raw = convolve2d(uncovered, mask, mode="same", boundary="fill", fillvalue=0)
    return normalize(raw)


def connectivity_terms(
    spec: GridSpec, stations: list[Cell], travel_speed: float = DEFAULT_TRAVEL_SPEED
) -> np.ndarray:
    """Per-cell travel time to the nearest ground station, straight-line."""
    if not stations:
        raise ValueError("station set is empty")
    if travel_speed <= 0:
        raise ValueError(f"travel_speed must be > 0, got {travel_speed}")
    for station in stations:
        if not spec.in_bounds(station):
            raise ValueError(f"station {station} out of bounds for {spec.rows}x{spec.cols} grid")
    ii, jj = np.meshgrid(np.arange(spec.rows), np.arange(spec.cols), indexing="ij")
    terms = np.full(spec.shape, np.inf)
    for si, sj in stations:
        # exact center distance: integer squared offsets, one sqrt, one multiply
        dist = spec.cell_size * np.sqrt((ii - si) ** 2 + (jj - sj) ** 2)
        np.minimum(terms, dist / travel_speed, out=terms)
    return terms


def score_connectivity(
    spec: GridSpec, stations: list[Cell], travel_speed: float = DEFAULT_TRAVEL_SPEED
) -> np.ndarray:
    """Proximity reward: cells nearest a ground station score highest."""
    terms = connectivity_terms(spec, stations, travel_speed)
    return normalize(terms.max() - terms)


def score_cost(rasters: CostRasters) -> np.ndarray:
    """Composite construction cost: per-raster normalize, sum, renormalize."""
    composite = (
        normalize(rasters.obstacle_density)
        + normalize(rasters.population_density)
        + normalize(rasters.rent)
    )
    return normalize(composite)
