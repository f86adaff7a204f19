"""Clustering-based seeding of station layouts from observed demand.

Demand cells are expanded into one point per trip at the cell center, the
points are clustered, and cluster centers become candidate station sites.
Over-clustered results can be pruned back by dropping the smallest clusters,
which filters sporadic outlying demand before any station lands on it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from sklearn.cluster import AgglomerativeClustering, KMeans
from sklearn.mixture import GaussianMixture

from .grid import GridSpec

log = logging.getLogger(__name__)

HAC_MAX_POINTS = 20_000

ALGORITHMS = ("kmeans", "gmm", "hac")


@dataclass(frozen=True)
class ClusterResult:
    """Cluster centers in grid coordinates plus per-point labels.

    A label of -1 marks a point left unassigned by pruning. For subsampled
    methods the labels cover the subsample actually clustered, not the full
    input.
    """

    centers: np.ndarray
    labels: np.ndarray

    @property
    def sizes(self) -> np.ndarray:
        assigned = self.labels[self.labels >= 0]
        return np.bincount(assigned, minlength=self.centers.shape[0])


@dataclass(frozen=True)
class InitStrategy:
    """One seeding recipe: cluster target_sites + over_cluster, keep target_sites."""

    algorithm: str
    target_sites: int
    over_cluster: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.target_sites < 1:
            raise ValueError(f"target_sites must be >= 1, got {self.target_sites}")
        if self.over_cluster < 0:
            raise ValueError(f"over_cluster must be >= 0, got {self.over_cluster}")


def points_from_demand(demand: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Expand a demand tensor into one (x, y) point per trip at its cell center.

    Points come out in row-major cell order, so the expansion is deterministic.
    """
    demand = np.asarray(demand)
    counts = demand.sum(axis=0) if demand.ndim == 3 else demand
    if counts.shape != spec.shape:
        raise ValueError(f"demand shape {counts.shape} does not match grid {spec.shape}")
    rows, cols = np.nonzero(counts)
    if rows.size == 0:
        return np.empty((0, 2), dtype=float)
    centers = np.stack(
        [
            spec.origin[0] + (cols + 0.5) * spec.cell_size,
            spec.origin[1] + (rows + 0.5) * spec.cell_size,
        ],
        axis=1,
    )
    return np.repeat(centers, counts[rows, cols].astype(np.int64), axis=0)


def _check_points(points: np.ndarray, k: int) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValueError(f"points must be (n, 2), got {points.shape}")
    if k < 1:
        raise ValueError(f"cluster count must be >= 1, got {k}")
    if points.shape[0] < k:
        raise ValueError(f"cannot form {k} clusters from {points.shape[0]} points")
    return points


def kmeans_centers(points: np.ndarray, k: int, seed: int) -> ClusterResult:
    points = _check_points(points, k)
    model = KMeans(n_clusters=k, init="k-means++", n_init=1, max_iter=300, random_state=seed)
    labels = model.fit_predict(points)
    return ClusterResult(centers=model.cluster_centers_.copy(), labels=labels)


def gmm_centers(points: np.ndarray, k: int, seed: int) -> ClusterResult:
    points = _check_points(points, k)
    model = GaussianMixture(
        n_components=k,
        covariance_type="diag",
        max_iter=100,
        init_params="k-means++",
        random_state=seed,
    )
    labels = model.fit_predict(points)
    return ClusterResult(centers=model.means_.copy(), labels=labels)


def hac_centers(
    points: np.ndarray, k: int, seed: int, max_points: int = HAC_MAX_POINTS
) -> ClusterResult:
    """Ward-linkage agglomerative clustering, subsampled when the input is large.

    Full-pairwise linkage is quadratic in memory, so inputs beyond max_points
    are reduced to a seeded uniform subsample first.
    """
    points = _check_points(points, k)
    if points.shape[0] > max_points:
        rng = np.random.default_rng(seed)
        index = rng.choice(points.shape[0], size=max_points, replace=False)
        points = points[np.sort(index)]
    model = AgglomerativeClustering(n_clusters=k, linkage="ward")
    labels = model.fit_predict(points)
    centers = np.stack([points[labels == label].mean(axis=0) for label in range(k)])
    return ClusterResult(centers=centers, labels=labels)


def cluster_points(points: np.ndarray, algorithm: str, k: int, seed: int) -> ClusterResult:
    if algorithm == "kmeans":
        return kmeans_centers(points, k, seed)
    if algorithm == "gmm":
        return gmm_centers(points, k, seed)
    if algorithm == "hac":
        return hac_centers(points, k, seed)
    raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {algorithm!r}")


def prune_smallest(result: ClusterResult, keep: int) -> ClusterResult:
    """Keep the `keep` most populated clusters; their points stay, the rest unassign.

    Size ties resolve toward the lower cluster index. Kept clusters are
    relabeled 0..keep-1 in original index order.
    """
    n = result.centers.shape[0]
    if not 1 <= keep <= n:
        raise ValueError(f"keep must be in [1, {n}], got {keep}")
    if keep == n:
        return ClusterResult(result.centers.copy(), result.labels.copy())
    # stable sort on negated sizes keeps lower indices first among ties
    order = np.argsort(-result.sizes, kind="stable")[:keep]
    kept = np.sort(order)
    remap = np.full(n, -1, dtype=np.int64)
    remap[kept] = np.arange(keep)
    labels = np.where(result.labels >= 0, remap[result.labels], -1)
    return ClusterResult(centers=result.centers[kept], labels=labels)


def layout_from_centers(centers: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Count cluster centers per grid cell to form a station layout.

    Centers outside the grid extent are clamped to the nearest edge cell and
    logged, so no requested station silently disappears.
    """
    centers = np.asarray(centers, dtype=float)
    layout = np.zeros(spec.shape, dtype=np.int64)
    for x, y in centers:
        cell = spec.cell_of(x, y)
        if cell is None:
            cell = spec.clamp_to_grid(x, y)
            log.warning("center (%.1f, %.1f) outside grid, clamped to cell %s", x, y, cell)
        layout[cell] += 1
    return layout


def layout_from_points(points: np.ndarray, spec: GridSpec, strategy: InitStrategy) -> np.ndarray:
    """Cluster raw points per the strategy and plant one station per surviving center."""
    k = strategy.target_sites + strategy.over_cluster
    result = cluster_points(points, strategy.algorithm, k, strategy.seed)
    if strategy.over_cluster > 0:
        result = prune_smallest(result, strategy.target_sites)
    return layout_from_centers(result.centers, spec)


def initial_layout(demand: np.ndarray, spec: GridSpec, strategy: InitStrategy) -> np.ndarray:
    """Like layout_from_points, with points expanded from a demand tensor."""
    return layout_from_points(points_from_demand(demand, spec), spec, strategy)
