"""File formats: flight records, rasters, stations, plans, configs, archives.

Geographic inputs arrive as lon/lat CSV and are projected onto the planning
grid with a local equirectangular projection, which is sub-meter accurate at
district scale. Plans round-trip through schema-versioned JSON and can be
exported as GeoJSON for mapping tools.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .grid import CapacityPolicy, GridSpec, supply_from_layout, validate_supply
from .optimizer import OptimizerConfig, default_kernel_radius

log = logging.getLogger(__name__)

EARTH_RADIUS = 6_371_000.0
PLAN_SCHEMA_VERSION = 1

KINDS = ("origin", "destination")


@dataclass(frozen=True)
class GeoProjection:
    """Local equirectangular projection anchored at a reference point."""

    ref_lon: float
    ref_lat: float

    def __post_init__(self) -> None:
        if not -180.0 <= self.ref_lon <= 180.0:
            raise ValueError(f"ref_lon out of range: {self.ref_lon}")
        if not -90.0 <= self.ref_lat <= 90.0:
            raise ValueError(f"ref_lat out of range: {self.ref_lat}")

    def to_xy(self, lon: float, lat: float) -> tuple[float, float]:
        x = EARTH_RADIUS * math.cos(math.radians(self.ref_lat)) * math.radians(lon - self.ref_lon)
        y = EARTH_RADIUS * math.radians(lat - self.ref_lat)
        return (x, y)

    def to_lonlat(self, x: float, y: float) -> tuple[float, float]:
        lon = self.ref_lon + math.degrees(x / (EARTH_RADIUS * math.cos(math.radians(self.ref_lat))))
        lat = self.ref_lat + math.degrees(y / EARTH_RADIUS)
        return (lon, lat)


def parse_timestamp(text: str) -> float:
    """Epoch seconds from an RFC-3339 string or a plain integer/float string."""
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    iso = text[:-1] + "+00:00" if text.endswith(("Z", "z")) else text
    dt = datetime.fromisoformat(iso)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def _timestamp_mode(sample: str) -> str:
    try:
        float(sample.strip())
        return "epoch"
    except ValueError:
        return "rfc3339"


@dataclass(frozen=True)
class ODLoadResult:
    """Gridded flight endpoints plus the raw accepted points behind them."""

    points: np.ndarray  # (n, 2) projected x, y of every accepted record
    demand: np.ndarray  # time_bins x rows x cols counts
    accepted: int
    skipped_extent: int
    skipped_window: int


def load_od_csv(
    path: str | Path,
    spec: GridSpec,
    projection: GeoProjection,
    window_start: float,
) -> ODLoadResult:
    """Grid flight endpoint records into a demand tensor.

    Every accepted record adds one demand unit at its (bin, cell); takeoffs
    and landings both occupy a service slot. Records outside the grid extent
    or the time window are skipped and counted. Timestamp format (epoch vs
    RFC-3339) is detected once from the first data row.
    """
    demand = np.zeros((spec.time_bins, spec.rows, spec.cols), dtype=np.int64)
    points: list[tuple[float, float]] = []
    skipped_extent = 0
    skipped_window = 0
    mode: str | None = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["timestamp", "lon", "lat", "kind"]:
            raise ValueError(f"{path}: expected header 'timestamp,lon,lat,kind', got {header}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ValueError(f"{path}:{line_no}: expected 4 fields, got {len(row)}")
            raw_ts, raw_lon, raw_lat, raw_kind = row
            if mode is None:
                mode = _timestamp_mode(raw_ts)
            try:
                ts = float(raw_ts) if mode == "epoch" else parse_timestamp(raw_ts)
                lon = float(raw_lon)
                lat = float(raw_lat)
            except ValueError as exc:
                raise ValueError(f"{path}:{line_no}: {exc}") from None
            if not -180.0 <= lon <= 180.0 or not -90.0 <= lat <= 90.0:
                raise ValueError(f"{path}:{line_no}: lon/lat out of range ({lon}, {lat})")
            if raw_kind.strip().lower() not in KINDS:
                raise ValueError(f"{path}:{line_no}: kind must be origin|destination, got {raw_kind!r}")
            t = spec.bin_of(ts - window_start)
            if t is None:
                skipped_window += 1
                continue
            x, y = projection.to_xy(lon, lat)
            cell = spec.cell_of(x, y)
            if cell is None:
                skipped_extent += 1
                continue
            demand[t, cell[0], cell[1]] += 1
            points.append((x, y))
    if skipped_extent or skipped_window:
        log.warning(
            "%s: skipped %d records outside extent, %d outside time window",
            path, skipped_extent, skipped_window,
        )
    point_array = np.array(points, dtype=float) if points else np.empty((0, 2))
    return ODLoadResult(
        points=point_array,
        demand=demand,
        accepted=len(points),
        skipped_extent=skipped_extent,
        skipped_window=skipped_window,
    )


def load_raster_csv(path: str | Path, spec: GridSpec) -> np.ndarray:
    """Dense numeric M x N grid, row 0 = grid row 0. Shape-exact, no padding."""
    rows: list[list[float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            if len(row) != spec.cols:
                raise ValueError(f"{path}: row {i} has {len(row)} values, expected {spec.cols}")
            parsed = []
            for j, value in enumerate(row):
                try:
                    parsed.append(float(value))
                except ValueError:
                    raise ValueError(f"{path}: non-numeric value at row {i} col {j}: {value!r}") from None
            rows.append(parsed)
    if len(rows) != spec.rows:
        raise ValueError(f"{path}: has {len(rows)} rows, expected {spec.rows}")
    return np.array(rows, dtype=float)


def save_matrix_csv(matrix: np.ndarray, path: str | Path) -> None:
    np.savetxt(path, np.asarray(matrix), delimiter=",", fmt="%.17g")


def load_stations_csv(
    path: str | Path, spec: GridSpec, projection: GeoProjection
) -> list[tuple[int, int]]:
    """Ground transit stations as grid cells; out-of-extent entries are skipped."""
    cells: list[tuple[int, int]] = []
    skipped = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["name", "lon", "lat"]:
            raise ValueError(f"{path}: expected header 'name,lon,lat', got {header}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{line_no}: expected 3 fields, got {len(row)}")
            name, raw_lon, raw_lat = row
            try:
                x, y = projection.to_xy(float(raw_lon), float(raw_lat))
            except ValueError as exc:
                raise ValueError(f"{path}:{line_no}: {exc}") from None
            cell = spec.cell_of(x, y)
            if cell is None:
                skipped += 1
                log.warning("%s:%d: station %r outside grid extent, skipped", path, line_no, name)
                continue
            cells.append(cell)
    if skipped:
        log.warning("%s: skipped %d stations outside extent", path, skipped)
    return cells


@dataclass
class PlanDocument:
    """A station layout with the grid and capacity context it was planned under."""

    spec: GridSpec
    policy: CapacityPolicy
    layout: np.ndarray
    loss_history: list[tuple[int, int]] | None = None
    provenance: dict = field(default_factory=dict)

    @property
    def supply(self) -> np.ndarray:
        return supply_from_layout(self.layout, self.policy)


def _spec_to_dict(spec: GridSpec) -> dict:
    return {
        "rows": spec.rows,
        "cols": spec.cols,
        "cell_size": spec.cell_size,
        "origin": list(spec.origin),
        "time_bins": spec.time_bins,
        "bin_duration": spec.bin_duration,
    }


def _spec_from_dict(data: dict) -> GridSpec:
    return GridSpec(
        rows=data["rows"],
        cols=data["cols"],
        cell_size=data["cell_size"],
        origin=tuple(data.get("origin", (0.0, 0.0))),
        time_bins=data.get("time_bins", 1),
        bin_duration=data.get("bin_duration", 3600.0),
    )


def _policy_to_dict(policy: CapacityPolicy) -> dict:
    return {
        "per_site_capacity": policy.per_site_capacity,
        "site_budget": policy.site_budget,
        "service_radius": policy.service_radius,
    }


def _policy_from_dict(data: dict) -> CapacityPolicy:
    return CapacityPolicy(
        per_site_capacity=data["per_site_capacity"],
        site_budget=data["site_budget"],
        service_radius=data["service_radius"],
    )


def plan_to_dict(doc: PlanDocument, deterministic: bool = False) -> dict:
    provenance = dict(doc.provenance)
    if deterministic:
        provenance.pop("created", None)
    return {
        "schema_version": PLAN_SCHEMA_VERSION,
        "grid": _spec_to_dict(doc.spec),
        "capacity": _policy_to_dict(doc.policy),
        "layout": np.asarray(doc.layout, dtype=np.int64).tolist(),
        "supply": np.asarray(doc.supply, dtype=np.int64).tolist(),
        "loss_history": [list(entry) for entry in doc.loss_history]
        if doc.loss_history is not None
        else None,
        "provenance": provenance,
    }


def save_plan(doc: PlanDocument, path: str | Path, deterministic: bool = False) -> None:
    payload = json.dumps(plan_to_dict(doc, deterministic=deterministic), indent=2, sort_keys=True)
    Path(path).write_text(payload + "\n", encoding="utf-8")


def load_plan(path: str | Path) -> PlanDocument:
    """Load and validate a plan; rejects unknown schemas and infeasible supply."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    version = data.get("schema_version")
    if version != PLAN_SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported plan schema version {version!r}")
    spec = _spec_from_dict(data["grid"])
    policy = _policy_from_dict(data["capacity"])
    layout = np.asarray(data["layout"], dtype=np.int64)
    if layout.shape != spec.shape:
        raise ValueError(f"{path}: layout shape {layout.shape} does not match grid {spec.shape}")
    if np.any(layout < 0):
        raise ValueError(f"{path}: layout has negative site counts")
    supply = np.asarray(data["supply"], dtype=np.int64)
    if supply.shape != spec.shape:
        raise ValueError(f"{path}: supply shape {supply.shape} does not match grid {spec.shape}")
    violations = validate_supply(supply, policy)
    if violations:
        raise ValueError(f"{path}: infeasible supply: " + "; ".join(v.message for v in violations))
    if np.any(supply != layout * policy.per_site_capacity):
        raise ValueError(f"{path}: supply does not equal layout * per-site capacity")
    loss_history = data.get("loss_history")
    return PlanDocument(
        spec=spec,
        policy=policy,
        layout=layout,
        loss_history=[tuple(entry) for entry in loss_history] if loss_history is not None else None,
        provenance=data.get("provenance", {}),
    )


def plan_to_geojson(doc: PlanDocument, projection: GeoProjection) -> dict:
    """One Point feature per occupied cell, site count as a property."""
    features = []
    for i, j in zip(*np.nonzero(doc.layout)):
        x, y = doc.spec.cell_center((int(i), int(j)))
        lon, lat = projection.to_lonlat(x, y)
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [lon, lat]},
                "properties": {"row": int(i), "col": int(j), "count": int(doc.layout[i, j])},
            }
        )
    return {"type": "FeatureCollection", "features": features}


def save_geojson(doc: PlanDocument, projection: GeoProjection, path: str | Path) -> None:
    payload = json.dumps(plan_to_geojson(doc, projection), indent=2)
    Path(path).write_text(payload + "\n", encoding="utf-8")


def save_demand_archive(path: str | Path, demand: np.ndarray, points: np.ndarray) -> None:
    """Demand tensor plus the raw projected points it was gridded from."""
    np.savez_compressed(path, demand=np.asarray(demand, dtype=np.int64), points=np.asarray(points))


def load_demand_archive(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    with np.load(path) as data:
        return data["demand"].astype(np.int64), data["points"]


def save_loss_csv(history: list[tuple[int, int]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "loss"])
        for iteration, loss in history:
            writer.writerow([iteration, loss])


@dataclass(frozen=True)
class AppConfig:
    """Everything a pipeline run needs, loaded from one JSON file.

    Relative data paths resolve against the config file's directory.
    """

    spec: GridSpec
    policy: CapacityPolicy
    optimizer: OptimizerConfig
    projection: GeoProjection
    time_origin: float
    travel_speed: float
    weights: tuple[float, float, float, float]
    top_k: int
    min_separation: float | None
    learning_rate: float
    data: dict[str, Path]


def load_config(path: str | Path) -> AppConfig:
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    spec = _spec_from_dict(raw["grid"])
    policy = _policy_from_dict(raw["capacity"])
    opt = raw.get("optimizer", {})
    optimizer = OptimizerConfig(
        iterations=opt.get("iterations", 300),
        kernel_radius=opt.get("kernel_radius", default_kernel_radius(policy, spec)),
        tabu_tenure=opt.get("tabu_tenure", 10),
        mode=opt.get("mode", "relocate"),
    )
    proj = raw.get("projection", {})
    projection = GeoProjection(ref_lon=proj.get("ref_lon", 0.0), ref_lat=proj.get("ref_lat", 0.0))
    time_origin = raw.get("time_origin", 0)
    if isinstance(time_origin, str):
        time_origin = parse_timestamp(time_origin)
    recommend = raw.get("recommend", {})
    weights = raw.get("weights", [1.0, 1.0, 1.0, -0.5])
    if len(weights) != 4:
        raise ValueError(f"{path}: weights must have 4 entries, got {len(weights)}")
    data = {key: path.parent / value for key, value in raw.get("data", {}).items()}
    return AppConfig(
        spec=spec,
        policy=policy,
        optimizer=optimizer,
        projection=projection,
        time_origin=float(time_origin),
        travel_speed=raw.get("scoring", {}).get("travel_speed", 15.0),
        weights=tuple(float(w) for w in weights),
        top_k=recommend.get("k", 10),
        min_separation=recommend.get("min_separation"),
        learning_rate=recommend.get("learning_rate", 0.05),
        data=data,
    )
