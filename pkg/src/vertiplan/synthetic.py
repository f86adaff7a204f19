"""Seeded synthetic district: flights, cost rasters, stations, config.

A 10 km x 10 km area gridded at 200 m with a 24-hour window. Demand comes
from a handful of Gaussian activity centers with distinct daily rhythms
(commuter peaks, business hours, evening leisure), so layouts that track
the blobs beat layouts that do not, by a wide and stable margin.

Run `python -m vertiplan.synthetic --out-dir data` to materialize the file
bundle, or call `generate` for the in-memory arrays used by the test suite.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .dataio import GeoProjection, save_matrix_csv
from .grid import CapacityPolicy, GridSpec

GRID = GridSpec(rows=50, cols=50, cell_size=200.0, time_bins=24, bin_duration=3600.0)
POLICY = CapacityPolicy(per_site_capacity=20, site_budget=60, service_radius=1000.0)
PROJECTION = GeoProjection(ref_lon=0.0, ref_lat=45.0)
TIME_ORIGIN = datetime(2026, 6, 1, tzinfo=timezone.utc)

DEFAULT_SEED = 7
DEFAULT_FLIGHTS = 9000

# activity centers: (x, y) mean in meters, spread, mixture weight, rhythm
_BLOB_XY = np.array(
    [
        (2500.0, 6500.0),
        (7000.0, 7200.0),
        (5000.0, 3000.0),
        (3000.0, 2000.0),
        (8000.0, 3500.0),
        (6000.0, 8500.0),
    ]
)
_BLOB_SIGMA = np.array([500.0, 700.0, 600.0, 400.0, 800.0, 450.0])
_BLOB_WEIGHT = np.array([0.28, 0.22, 0.18, 0.12, 0.12, 0.08])

_RHYTHMS = {
    "commuter": [0, 0, 0, 0, 0, 1, 4, 9, 7, 3, 2, 2, 2, 2, 2, 3, 5, 9, 8, 4, 2, 1, 1, 0],
    "business": [0, 0, 0, 0, 0, 0, 1, 3, 6, 8, 8, 7, 6, 7, 8, 8, 7, 5, 3, 1, 1, 0, 0, 0],
    "leisure": [1, 1, 0, 0, 0, 0, 0, 1, 1, 2, 3, 4, 4, 4, 4, 4, 5, 6, 8, 9, 8, 6, 4, 2],
}
_BLOB_RHYTHM = ["commuter", "business", "business", "commuter", "leisure", "leisure"]


@dataclass(frozen=True)
class SyntheticDataset:
    """In-memory twin of the generated file bundle."""

    spec: GridSpec
    policy: CapacityPolicy
    projection: GeoProjection
    time_origin: float
    records: list[tuple[int, float, float, str]]  # epoch s, lon, lat, kind
    demand: np.ndarray
    points: np.ndarray
    rasters: dict[str, np.ndarray]
    stations: list[tuple[str, float, float]]  # name, lon, lat


def _sample_endpoints(rng: np.random.Generator, flights: int) -> np.ndarray:
    """(2 * flights, 3) array of t_seconds, x, y; origin rows precede their landing."""
    profiles = np.array([_RHYTHMS[name] for name in _BLOB_RHYTHM], dtype=float)
    profiles /= profiles.sum(axis=1, keepdims=True)
    out = np.empty((2 * flights, 3))
    blobs = rng.choice(len(_BLOB_XY), size=(flights, 2), p=_BLOB_WEIGHT)
    for f in range(flights):
        origin_blob, dest_blob = blobs[f]
        hour = rng.choice(24, p=profiles[origin_blob])
        t0 = hour * 3600.0 + rng.uniform(0.0, 3600.0)
        duration = rng.uniform(300.0, 1500.0)
        origin = rng.normal(_BLOB_XY[origin_blob], _BLOB_SIGMA[origin_blob])
        dest = rng.normal(_BLOB_XY[dest_blob], _BLOB_SIGMA[dest_blob])
        out[2 * f] = (t0, origin[0], origin[1])
        out[2 * f + 1] = (t0 + duration, dest[0], dest[1])
    return out


def generate(seed: int = DEFAULT_SEED, flights: int = DEFAULT_FLIGHTS) -> SyntheticDataset:
    """Build the dataset, gridding endpoints by the same rule ingestion uses.

    Record coordinates are quantized exactly as they will appear in the CSV
    (integer epoch seconds, 8-decimal lon/lat), so loading the written file
    reproduces `demand` bit for bit.
    """
    rng = np.random.default_rng(seed)
    spec, policy, projection = GRID, POLICY, PROJECTION
    window_start = TIME_ORIGIN.timestamp()

    endpoints = _sample_endpoints(rng, flights)
    records: list[tuple[int, float, float, str]] = []
    demand = np.zeros((spec.time_bins, spec.rows, spec.cols), dtype=np.int64)
    points: list[tuple[float, float]] = []
    for idx, (t_rel, x, y) in enumerate(endpoints):
        kind = "origin" if idx % 2 == 0 else "destination"
        lon, lat = projection.to_lonlat(x, y)
        lon, lat = round(lon, 8), round(lat, 8)
        epoch = int(window_start + t_rel)
        records.append((epoch, lon, lat, kind))
        t = spec.bin_of(epoch - window_start)
        if t is None:
            continue
        qx, qy = projection.to_xy(lon, lat)
        cell = spec.cell_of(qx, qy)
        if cell is None:
            continue
        demand[t, cell[0], cell[1]] += 1
        points.append((qx, qy))

    rasters = _make_rasters(rng, spec)
    stations = _make_stations(projection)
    return SyntheticDataset(
        spec=spec,
        policy=policy,
        projection=projection,
        time_origin=window_start,
        records=records,
        demand=demand,
        points=np.array(points),
        rasters=rasters,
        stations=stations,
    )


def _bumps(spec: GridSpec, centers: np.ndarray, sigmas: np.ndarray, heights: np.ndarray) -> np.ndarray:
    ii, jj = np.meshgrid(np.arange(spec.rows), np.arange(spec.cols), indexing="ij")
    x = (jj + 0.5) * spec.cell_size
    y = (ii + 0.5) * spec.cell_size
    field = np.zeros(spec.shape)
    for (cx, cy), sigma, height in zip(centers, sigmas, heights):
        field += height * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * sigma**2))
    return field


def _make_rasters(rng: np.random.Generator, spec: GridSpec) -> dict[str, np.ndarray]:
    obstacle = _bumps(
        spec,
        _BLOB_XY[:3],
        np.array([900.0, 1100.0, 800.0]),
        np.array([0.9, 1.0, 0.5]),
    ) + rng.uniform(0.0, 0.08, spec.shape)
    population = _bumps(spec, _BLOB_XY, _BLOB_SIGMA * 1.6, _BLOB_WEIGHT * 30000.0)
    population += rng.uniform(0.0, 250.0, spec.shape)
    rent = _bumps(
        spec,
        np.array([(5000.0, 5000.0), (7000.0, 7200.0)]),
        np.array([2500.0, 1200.0]),
        np.array([60.0, 45.0]),
    ) + rng.uniform(0.0, 4.0, spec.shape)
    return {"obstacle": obstacle, "population": population, "rent": rent}


def _make_stations(projection: GeoProjection) -> list[tuple[str, float, float]]:
    # two transit lines crossing the district
    xy = [(1000.0 + 1600.0 * k, 1000.0 + 1600.0 * k) for k in range(6)]
    xy += [(1500.0 + 1750.0 * k, 7000.0) for k in range(5)]
    stations = []
    for n, (x, y) in enumerate(xy, start=1):
        lon, lat = projection.to_lonlat(x, y)
        stations.append((f"S{n:02d}", round(lon, 8), round(lat, 8)))
    return stations


def _rfc3339(epoch: int) -> str:
    return datetime.fromtimestamp(epoch, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def write_dataset(out_dir: str | Path, seed: int = DEFAULT_SEED, flights: int = DEFAULT_FLIGHTS) -> SyntheticDataset:
    """Write od.csv, the three cost rasters, stations.csv, and config.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = generate(seed=seed, flights=flights)

    with open(out / "od.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "lon", "lat", "kind"])
        for epoch, lon, lat, kind in data.records:
            writer.writerow([_rfc3339(epoch), f"{lon:.8f}", f"{lat:.8f}", kind])

    for name, raster in data.rasters.items():
        save_matrix_csv(raster, out / f"{name}.csv")

    with open(out / "stations.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "lon", "lat"])
        for name, lon, lat in data.stations:
            writer.writerow([name, f"{lon:.8f}", f"{lat:.8f}"])

    config = {
        "grid": {
            "rows": data.spec.rows,
            "cols": data.spec.cols,
            "cell_size": data.spec.cell_size,
            "origin": [0.0, 0.0],
            "time_bins": data.spec.time_bins,
            "bin_duration": data.spec.bin_duration,
        },
        "capacity": {
            "per_site_capacity": data.policy.per_site_capacity,
            "site_budget": data.policy.site_budget,
            "service_radius": data.policy.service_radius,
        },
        "optimizer": {"iterations": 300, "kernel_radius": 5, "tabu_tenure": 10, "mode": "relocate"},
        "projection": {"ref_lon": data.projection.ref_lon, "ref_lat": data.projection.ref_lat},
        "time_origin": _rfc3339(int(data.time_origin)),
        "scoring": {"travel_speed": 15.0},
        "recommend": {"k": 10, "min_separation": None, "learning_rate": 0.05},
        "weights": [1.0, 1.0, 1.0, -0.5],
        "data": {
            "od": "od.csv",
            "demand": "demand.npz",
            "obstacle": "obstacle.csv",
            "population": "population.csv",
            "rent": "rent.csv",
            "stations": "stations.csv",
            "plan": "plan.json",
        },
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    return data


def displaced_points(points: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Mirror points through the grid center: a deliberately bad seeding input.

    Clustering the mirrored cloud puts every initial station diametrically
    across from the demand it should serve, which is the worst realistic
    starting layout a clustering initializer can produce.
    """
    points = np.asarray(points, dtype=float)
    extent_x = spec.origin[0] * 2 + spec.cols * spec.cell_size
    extent_y = spec.origin[1] * 2 + spec.rows * spec.cell_size
    return np.column_stack([extent_x - points[:, 0], extent_y - points[:, 1]])


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Generate the synthetic benchmark bundle.")
    parser.add_argument("--out-dir", required=True, help="directory for the file bundle")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--flights", type=int, default=DEFAULT_FLIGHTS)
    args = parser.parse_args(argv)
    data = write_dataset(args.out_dir, seed=args.seed, flights=args.flights)
    total = int(data.demand.sum())
    print(f"wrote {len(data.records)} endpoint records, {total} gridded into {args.out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
