"""Capacity-aware station network planning on a spatiotemporal demand grid."""

from .clustering import ClusterResult, InitStrategy, initial_layout, layout_from_points
from .grid import (
    CapacityPolicy,
    Cell,
    GridSpec,
    Violation,
    demand_tensor,
    supply_from_layout,
    validate_supply,
    vertiport_layout,
)
from .matching import MatchResult, match, total_loss
from .optimizer import OptimizerConfig, OptimizerState, optimize, step
from .recommender import (
    DEFAULT_WEIGHTS,
    BudgetExhaustedError,
    InteractionRecord,
    PlanningSession,
    StrategyScores,
    comprehensive_score,
    feedback_update,
    recommend,
)
from .scoring import (
    CostRasters,
    distilled_from_supply,
    normalize,
    score_connectivity,
    score_cost,
    score_coverage,
    score_demand,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExhaustedError",
    "CapacityPolicy",
    "Cell",
    "ClusterResult",
    "CostRasters",
    "DEFAULT_WEIGHTS",
    "GridSpec",
    "InitStrategy",
    "InteractionRecord",
    "MatchResult",
    "OptimizerConfig",
    "OptimizerState",
    "PlanningSession",
    "StrategyScores",
    "Violation",
    "__version__",
    "comprehensive_score",
    "demand_tensor",
    "distilled_from_supply",
    "feedback_update",
    "initial_layout",
    "layout_from_points",
    "match",
    "normalize",
    "optimize",
    "recommend",
    "score_connectivity",
    "score_cost",
    "score_coverage",
    "score_demand",
    "step",
    "supply_from_layout",
    "total_loss",
    "validate_supply",
    "vertiport_layout",
]
