"""Initialization study: clustering algorithms crossed with seeding strategies.

For each combination the harness records the loss of the freshly seeded
layout and the best loss after optimization, mirroring the usual benchmark
table layout (one row per algorithm x strategy). Orderings between
strategies are reported, not asserted; they depend on the demand geometry.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .clustering import ALGORITHMS, InitStrategy, layout_from_points, points_from_demand
from .grid import CapacityPolicy, GridSpec, supply_from_layout
from .matching import match, total_loss
from .optimizer import OptimizerConfig, default_kernel_radius, optimize

log = logging.getLogger(__name__)

DEFAULT_OVER_FRACTIONS = (0.0, 0.05, 0.25)


@dataclass(frozen=True)
class StudyRow:
    algorithm: str
    over_cluster: int
    init_loss: int
    optimized_loss: int

    @property
    def strategy(self) -> str:
        return "direct" if self.over_cluster == 0 else f"over+{self.over_cluster}"


def run_study(
    demand: np.ndarray,
    spec: GridSpec,
    policy: CapacityPolicy,
    iterations: int,
    seed: int,
    target_sites: int | None = None,
    over_fractions: tuple[float, ...] = DEFAULT_OVER_FRACTIONS,
    algorithms: tuple[str, ...] = ALGORITHMS,
    kernel_radius: int | None = None,
) -> list[StudyRow]:
    """One row per algorithm x over-cluster strategy, losses before and after."""
    target = policy.site_budget if target_sites is None else target_sites
    if kernel_radius is None:
        kernel_radius = default_kernel_radius(policy, spec)
    config = OptimizerConfig(iterations=iterations, kernel_radius=kernel_radius)
    points = points_from_demand(demand, spec)
    overs = sorted({int(round(frac * target)) for frac in over_fractions})
    rows: list[StudyRow] = []
    for algorithm in algorithms:
        for over in overs:
            strategy = InitStrategy(
                algorithm=algorithm, target_sites=target, over_cluster=over, seed=seed
            )
            layout = layout_from_points(points, spec, strategy)
            supply = supply_from_layout(layout, policy)
            init_loss = total_loss(match(demand, supply, spec, policy.service_radius))
            _, history = optimize(demand, supply, spec, policy, config)
            optimized_loss = min(loss for _, loss in history)
            rows.append(
                StudyRow(
                    algorithm=algorithm,
                    over_cluster=over,
                    init_loss=init_loss,
                    optimized_loss=optimized_loss,
                )
            )
            log.info(
                "study %s over=%d: init %d -> optimized %d",
                algorithm, over, init_loss, optimized_loss,
            )
    return rows
