"""HTTP facade: planning sessions, score layers, selections, batch jobs.

Sessions live in memory, one lock each, so concurrent selects on a session
apply in some sequential order while distinct sessions proceed in parallel.
Optimization runs on a small worker pool and never touches session state.
"""

from __future__ import annotations

import logging
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .clustering import InitStrategy, layout_from_points, points_from_demand
from .dataio import (
    AppConfig,
    load_config,
    load_demand_archive,
    load_od_csv,
    load_plan,
    load_raster_csv,
    load_stations_csv,
)
from .grid import Cell, supply_from_layout
from .optimizer import OptimizerConfig, optimize
from .recommender import BudgetExhaustedError, PlanningSession
from .scoring import STRATEGIES, CostRasters, distilled_from_supply

log = logging.getLogger(__name__)

LAYERS = STRATEGIES + ("comprehensive",)


class ApiError(Exception):
    """Error carrying the wire shape: status plus {code, message, detail}."""

    def __init__(self, status: int, code: str, message: str, detail: object = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


@dataclass
class DatasetBundle:
    """Everything the service needs, loaded once at startup."""

    config: AppConfig
    demand: np.ndarray
    points: np.ndarray
    distilled: np.ndarray
    rasters: CostRasters
    stations: list[Cell]


def load_bundle(config_path: str | Path) -> DatasetBundle:
    """Load the dataset bundle a config file points at.

    Demand comes from the archive when present, otherwise from the flight
    CSV. The distilled scoring demand comes from an optimized plan when one
    is on disk; otherwise the temporal sum of raw demand stands in, which
    keeps a fresh bundle usable before its first optimization run.
    """
    config = load_config(config_path)
    data = config.data

    demand = points = None
    archive = data.get("demand")
    if archive is not None and archive.exists():
        demand, points = load_demand_archive(archive)
    elif data.get("od") is not None and data["od"].exists():
        loaded = load_od_csv(data["od"], config.spec, config.projection, config.time_origin)
        demand, points = loaded.demand, loaded.points
    else:
        raise ValueError(f"{config_path}: no demand archive or flight CSV available")

    def require(key: str) -> Path:
        path = data.get(key)
        if path is None or not path.exists():
            raise ValueError(f"{config_path}: missing required dataset file for {key!r}")
        return path

    rasters = CostRasters(
        obstacle_density=load_raster_csv(require("obstacle"), config.spec),
        population_density=load_raster_csv(require("population"), config.spec),
        rent=load_raster_csv(require("rent"), config.spec),
    )
    stations = load_stations_csv(require("stations"), config.spec, config.projection)
    if not stations:
        raise ValueError(f"{config_path}: no stations inside the grid extent")

    plan_path = data.get("plan")
    if plan_path is not None and plan_path.exists():
        distilled = distilled_from_supply(load_plan(plan_path).supply)
    else:
        log.warning("no optimized plan at %s, distilling from raw demand totals", plan_path)
        distilled = demand.sum(axis=0, dtype=np.int64)[np.newaxis]

    return DatasetBundle(
        config=config,
        demand=demand,
        points=np.asarray(points),
        distilled=distilled,
        rasters=rasters,
        stations=stations,
    )


class CreateSessionRequest(BaseModel):
    weights: list[float] | None = None
    top_k: int | None = None


class SelectRequest(BaseModel):
    cell: list[int]


class WeightsRequest(BaseModel):
    weights: list[float]


class OptimizeRequest(BaseModel):
    iterations: int | None = None
    algorithm: str = "kmeans"
    target_sites: int | None = None
    over_cluster: int = 0
    seed: int = 0
    kernel_radius: int | None = None
    tabu_tenure: int | None = None
    mode: str | None = None


@dataclass
class _SessionHolder:
    session: PlanningSession
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class _Job:
    status: str = "queued"
    loss_history: list[tuple[int, int]] | None = None
    layout: list[list[int]] | None = None
    error: str | None = None


def _session_state(session_id: str, session: PlanningSession) -> dict:
    occupied = [
        [int(i), int(j), int(session.supply[i, j] // session.policy.per_site_capacity)]
        for i, j in zip(*np.nonzero(session.supply))
    ]
    comprehensive = session.comprehensive
    return {
        "id": session_id,
        "version": session.version,
        "weights": [float(w) for w in session.weights],
        "budget": {"used": session.site_count, "total": session.policy.site_budget},
        "grid": {
            "rows": session.spec.rows,
            "cols": session.spec.cols,
            "cell_size": session.spec.cell_size,
        },
        "plan": {"cells": occupied},
        "recommendations": [
            {
                "cell": [int(i), int(j)],
                "score": float(comprehensive[i, j]),
                "features": [float(v) for v in session.scores.features_at((i, j))],
            }
            for i, j in session.recommended
        ],
    }


def create_app(bundle: DatasetBundle) -> FastAPI:
    app = FastAPI(title="vertiplan planning service", version="0.1.0")
    app.state.bundle = bundle
    sessions: dict[str, _SessionHolder] = {}
    jobs: dict[str, _Job] = {}
    jobs_lock = threading.Lock()
    executor = ThreadPoolExecutor(max_workers=2)

    config = bundle.config

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "detail": exc.detail},
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"code": "invalid_request", "message": "request validation failed",
                     "detail": exc.errors()},
        )

    def holder_of(session_id: str) -> _SessionHolder:
        holder = sessions.get(session_id)
        if holder is None:
            raise ApiError(404, "unknown_session", f"no session {session_id}")
        return holder

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    def create_session(request: CreateSessionRequest) -> dict:
        weights = request.weights if request.weights is not None else list(config.weights)
        if len(weights) != 4 or not all(np.isfinite(weights)):
            raise ApiError(400, "invalid_weights", "weights must be 4 finite numbers", weights)
        try:
            session = PlanningSession(
                spec=config.spec,
                policy=config.policy,
                distilled_demand=bundle.distilled,
                rasters=bundle.rasters,
                stations=bundle.stations,
                weights=np.asarray(weights, dtype=float),
                top_k=request.top_k or config.top_k,
                min_separation=config.min_separation,
                learning_rate=config.learning_rate,
                travel_speed=config.travel_speed,
                kernel_radius=config.optimizer.kernel_radius,
            )
        except ValueError as exc:
            raise ApiError(400, "invalid_session", str(exc)) from exc
        session_id = uuid.uuid4().hex
        sessions[session_id] = _SessionHolder(session=session)
        return _session_state(session_id, session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        holder = holder_of(session_id)
        with holder.lock:
            return _session_state(session_id, holder.session)

    @app.get("/sessions/{session_id}/scores")
    def get_scores(session_id: str, layer: str) -> dict:
        if layer not in LAYERS:
            raise ApiError(400, "unknown_layer", f"layer must be one of {LAYERS}", layer)
        holder = holder_of(session_id)
        with holder.lock:
            session = holder.session
            if layer == "comprehensive":
                values = session.comprehensive
            else:
                values = getattr(session.scores, layer)
            return {
                "layer": layer,
                "version": session.version,
                "rows": session.spec.rows,
                "cols": session.spec.cols,
                "values": [float(v) for v in values.ravel()],
            }

    @app.post("/sessions/{session_id}/select")
    def select(session_id: str, request: SelectRequest) -> dict:
        if len(request.cell) != 2:
            raise ApiError(400, "invalid_cell", "cell must be [row, col]", request.cell)
        holder = holder_of(session_id)
        with holder.lock:
            session = holder.session
            try:
                session.select((request.cell[0], request.cell[1]))
            except BudgetExhaustedError as exc:
                raise ApiError(409, "budget_exhausted", str(exc)) from exc
            except ValueError as exc:
                raise ApiError(400, "out_of_bounds", str(exc)) from exc
            return _session_state(session_id, session)

    @app.put("/sessions/{session_id}/weights")
    def put_weights(session_id: str, request: WeightsRequest) -> dict:
        holder = holder_of(session_id)
        with holder.lock:
            try:
                holder.session.set_weights(np.asarray(request.weights, dtype=float))
            except ValueError as exc:
                raise ApiError(400, "invalid_weights", str(exc), request.weights) from exc
            return _session_state(session_id, holder.session)

    def run_job(job_id: str, request: OptimizeRequest) -> None:
        with jobs_lock:
            jobs[job_id].status = "running"
        try:
            strategy = InitStrategy(
                algorithm=request.algorithm,
                target_sites=request.target_sites or config.policy.site_budget,
                over_cluster=request.over_cluster,
                seed=request.seed,
            )
            points = bundle.points
            if points.size == 0:
                points = points_from_demand(bundle.demand, config.spec)
            layout = layout_from_points(points, config.spec, strategy)
            opt_config = OptimizerConfig(
                iterations=request.iterations if request.iterations is not None
                else config.optimizer.iterations,
                kernel_radius=request.kernel_radius if request.kernel_radius is not None
                else config.optimizer.kernel_radius,
                tabu_tenure=request.tabu_tenure if request.tabu_tenure is not None
                else config.optimizer.tabu_tenure,
                mode=request.mode or config.optimizer.mode,
            )
            supply = supply_from_layout(layout, config.policy)
            best, history = optimize(bundle.demand, supply, config.spec, config.policy, opt_config)
            best_layout = (best // config.policy.per_site_capacity).astype(np.int64)
            with jobs_lock:
                jobs[job_id].status = "done"
                jobs[job_id].loss_history = history
                jobs[job_id].layout = best_layout.tolist()
        except Exception as exc:  # job surface: report, never crash the service
            log.exception("optimization job %s failed", job_id)
            with jobs_lock:
                jobs[job_id].status = "failed"
                jobs[job_id].error = str(exc)

    @app.post("/optimize", status_code=202)
    def submit_optimize(request: OptimizeRequest) -> dict:
        try:
            OptimizerConfig(
                iterations=request.iterations if request.iterations is not None else 1,
                kernel_radius=request.kernel_radius if request.kernel_radius is not None else 0,
                tabu_tenure=request.tabu_tenure if request.tabu_tenure is not None else 0,
                mode=request.mode or "relocate",
            )
            if request.algorithm not in ("kmeans", "gmm", "hac"):
                raise ValueError(f"unknown algorithm {request.algorithm!r}")
        except ValueError as exc:
            raise ApiError(400, "invalid_config", str(exc)) from exc
        job_id = uuid.uuid4().hex
        with jobs_lock:
            jobs[job_id] = _Job()
        executor.submit(run_job, job_id, request)
        return {"job": job_id, "status": "queued"}

    @app.get("/optimize/{job_id}")
    def job_status(job_id: str) -> dict:
        with jobs_lock:
            job = jobs.get(job_id)
            if job is None:
                raise ApiError(404, "unknown_job", f"no job {job_id}")
            payload: dict = {"job": job_id, "status": job.status}
            if job.status == "done":
                payload["loss_history"] = [list(entry) for entry in job.loss_history]
                payload["plan"] = {"layout": job.layout}
            if job.status == "failed":
                payload["error"] = job.error
        return payload

    return app


def serve(config_path: str | Path, host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    app = create_app(load_bundle(config_path))
    uvicorn.run(app, host=host, port=port, log_level="info")
