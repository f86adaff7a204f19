"""Command-line driver for the batch planning workflow.

Stages mirror the pipeline order: ingest flights, seed a layout by
clustering, optimize it, score the district, pick recommendations, or serve
the whole thing over HTTP. Every stage that writes delimited output also
renders a figure next to it.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .clustering import ALGORITHMS, InitStrategy, layout_from_points, points_from_demand
from .dataio import (
    AppConfig,
    PlanDocument,
    load_config,
    load_demand_archive,
    load_od_csv,
    load_plan,
    load_raster_csv,
    load_stations_csv,
    save_demand_archive,
    save_geojson,
    save_loss_csv,
    save_matrix_csv,
    save_plan,
)
from .grid import supply_from_layout, validate_supply
from .matching import match, total_loss
from .optimizer import OptimizerConfig, optimize
from .recommender import StrategyScores, comprehensive_score, recommend
from .scoring import (
    CostRasters,
    distilled_from_supply,
    score_connectivity,
    score_cost,
    score_coverage,
    score_demand,
)

log = logging.getLogger(__name__)


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _require(path: Path | None, what: str) -> Path:
    if path is None:
        raise ValueError(f"config provides no path for {what}")
    if not path.exists():
        raise FileNotFoundError(f"{what} file not found: {path}")
    return path


def cmd_ingest(args: argparse.Namespace, config: AppConfig) -> int:
    od_path = Path(args.od) if args.od else _require(config.data.get("od"), "od")
    result = load_od_csv(od_path, config.spec, config.projection, config.time_origin)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_demand_archive(out, result.demand, result.points)
    from .report import save_demand_report

    save_demand_report(result.demand, out.with_suffix(".png"))
    print(f"accepted {result.accepted} records into {out}")
    print(f"skipped {result.skipped_extent} outside extent, {result.skipped_window} outside window")
    print(f"demand total {int(result.demand.sum())} across {config.spec.time_bins} bins")
    return 0


def cmd_init(args: argparse.Namespace, config: AppConfig) -> int:
    demand_path = Path(args.demand) if args.demand else _require(config.data.get("demand"), "demand")
    demand, points = load_demand_archive(demand_path)
    if points.size == 0:
        points = points_from_demand(demand, config.spec)
    strategy = InitStrategy(
        algorithm=args.algorithm,
        target_sites=args.k,
        over_cluster=args.over_cluster,
        seed=args.seed,
    )
    layout = layout_from_points(points, config.spec, strategy)
    provenance = {
        "source": "init",
        "algorithm": args.algorithm,
        "k": args.k,
        "over_cluster": args.over_cluster,
        "seed": args.seed,
    }
    if not args.deterministic:
        provenance["created"] = _now()
    doc = PlanDocument(spec=config.spec, policy=config.policy, layout=layout, provenance=provenance)
    save_plan(doc, args.out, deterministic=args.deterministic)
    print(f"seeded {int(layout.sum())} sites with {args.algorithm} into {args.out}")
    return 0


def cmd_optimize(args: argparse.Namespace, config: AppConfig) -> int:
    doc = load_plan(args.plan)
    demand_path = Path(args.demand) if args.demand else _require(config.data.get("demand"), "demand")
    demand, _ = load_demand_archive(demand_path)
    opt = config.optimizer
    opt_config = OptimizerConfig(
        iterations=args.iterations if args.iterations is not None else opt.iterations,
        kernel_radius=opt.kernel_radius,
        tabu_tenure=opt.tabu_tenure,
        mode=opt.mode,
    )
    supply = doc.supply
    best, history = optimize(demand, supply, doc.spec, doc.policy, opt_config)
    best_layout = (best // doc.policy.per_site_capacity).astype(np.int64)
    provenance = dict(doc.provenance)
    provenance.update({"source": "optimize", "iterations": opt_config.iterations})
    if args.deterministic:
        provenance.pop("created", None)
    else:
        provenance["created"] = _now()
    out_doc = PlanDocument(
        spec=doc.spec,
        policy=doc.policy,
        layout=best_layout,
        loss_history=history,
        provenance=provenance,
    )
    save_plan(out_doc, args.out, deterministic=args.deterministic)
    if args.geojson:
        save_geojson(out_doc, config.projection, args.geojson)
    loss_out = Path(args.loss_out) if args.loss_out else Path(args.out).with_suffix(".loss.csv")
    save_loss_csv(history, loss_out)
    from .report import save_loss_curve

    save_loss_curve(history, loss_out.with_suffix(".png"), "optimization loss")
    first, last = history[0][1], min(loss for _, loss in history)
    print(f"loss {first} -> {last} over {opt_config.iterations} iterations")
    print(f"plan written to {args.out}, loss curve to {loss_out}")
    return 0


def _load_rasters(config: AppConfig) -> CostRasters:
    return CostRasters(
        obstacle_density=load_raster_csv(_require(config.data.get("obstacle"), "obstacle"), config.spec),
        population_density=load_raster_csv(
            _require(config.data.get("population"), "population"), config.spec
        ),
        rent=load_raster_csv(_require(config.data.get("rent"), "rent"), config.spec),
    )


def cmd_score(args: argparse.Namespace, config: AppConfig) -> int:
    doc = load_plan(args.plan)
    spec, policy = doc.spec, doc.policy
    distilled = distilled_from_supply(doc.supply)
    user_supply = np.zeros(spec.shape, dtype=np.int64)
    rasters = _load_rasters(config)
    stations = load_stations_csv(_require(config.data.get("stations"), "stations"), spec, config.projection)
    if not stations:
        raise ValueError("no stations inside the grid extent")
    weights = np.asarray(
        [float(w) for w in args.weights.split(",")] if args.weights else config.weights
    )
    if weights.shape != (4,):
        raise ValueError("expected exactly 4 comma-separated weights")
    scores = StrategyScores(
        demand=score_demand(user_supply, distilled, spec, policy.service_radius,
                            config.optimizer.kernel_radius),
        coverage=score_coverage(user_supply, spec, policy.service_radius),
        connectivity=score_connectivity(spec, stations, config.travel_speed),
        cost=score_cost(rasters),
    )
    comprehensive = comprehensive_score(scores, weights)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    from .report import save_heatmap

    layers = {
        "demand": scores.demand,
        "coverage": scores.coverage,
        "connectivity": scores.connectivity,
        "cost": scores.cost,
        "comprehensive": comprehensive,
    }
    for name, values in layers.items():
        save_matrix_csv(values, out_dir / f"{name}.csv")
        save_heatmap(values, out_dir / f"{name}.png", f"{name} score", label="score")
    print(f"wrote {len(layers)} score layers to {out_dir}")
    return 0


def cmd_recommend(args: argparse.Namespace, config: AppConfig) -> int:
    comprehensive = load_raster_csv(args.scores, config.spec)
    min_separation = (
        args.min_separation
        if args.min_separation is not None
        else (config.min_separation if config.min_separation is not None
              else config.policy.service_radius)
    )
    cells = recommend(comprehensive, args.k, min_separation, config.spec)

    def write(handle) -> None:
        writer = csv.writer(handle)
        writer.writerow(["rank", "row", "col", "score"])
        for rank, (i, j) in enumerate(cells, start=1):
            writer.writerow([rank, i, j, f"{comprehensive[i, j]:.17g}"])

    if args.out is None:
        write(sys.stdout)
    else:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write(fh)
        from .report import save_heatmap

        save_heatmap(
            comprehensive,
            Path(args.out).with_suffix(".png"),
            "comprehensive score, recommended cells marked",
            label="score",
            markers=cells,
        )
    return 0


def cmd_serve(args: argparse.Namespace, config: AppConfig) -> int:
    from .service import serve

    serve(args.config, host=args.host, port=args.port)
    return 0


def cmd_validate(args: argparse.Namespace, config: AppConfig) -> int:
    doc = load_plan(args.plan)
    violations = validate_supply(doc.supply, doc.policy, enforce_total=True)
    if violations:
        for violation in violations:
            print(f"violation [{violation.constraint}] {violation.message}")
        return 1
    print(f"plan {args.plan} is feasible: {int(doc.layout.sum())} sites, "
          f"capacity {int(doc.supply.sum())}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vertiplan", description="UAV station network planning")
    parser.add_argument("--config", required=True, help="path to the JSON config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="grid flight records into a demand archive")
    p.add_argument("--od", help="flight endpoint CSV (default: config data.od)")
    p.add_argument("--out", required=True, help="output .npz archive")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("init", help="seed a station layout by clustering demand")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="kmeans")
    p.add_argument("--k", type=int, required=True, help="target site count")
    p.add_argument("--over-cluster", type=int, default=0, dest="over_cluster")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--demand", help="demand archive (default: config data.demand)")
    p.add_argument("--out", required=True, help="output plan JSON")
    p.add_argument("--deterministic", action="store_true", help="omit timestamps from output")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("optimize", help="improve a plan against the demand tensor")
    p.add_argument("--plan", required=True)
    p.add_argument("--demand", help="demand archive (default: config data.demand)")
    p.add_argument("--iterations", type=int, help="override config iteration count")
    p.add_argument("--out", required=True, help="output plan JSON")
    p.add_argument("--loss-out", dest="loss_out", help="loss curve CSV (default: alongside plan)")
    p.add_argument("--geojson", help="optional GeoJSON export path")
    p.add_argument("--deterministic", action="store_true", help="omit timestamps from output")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("score", help="compute strategy scores for a plan")
    p.add_argument("--plan", required=True, help="optimized plan (scoring reference)")
    p.add_argument("--weights", help="synthesis weights w1,w2,w3,w4")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("recommend", help="top-k diverse cells from a comprehensive score CSV")
    p.add_argument("--scores", required=True, help="comprehensive score CSV")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--min-separation", dest="min_separation", type=float)
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("serve", help="start the HTTP planning service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("validate", help="check a plan against the capacity rules")
    p.add_argument("--plan", required=True)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        return args.func(args, config)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
