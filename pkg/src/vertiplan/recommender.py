"""Score synthesis, diverse recommendation, and preference learning.

The four strategy layers are combined by a weighted sum through a sigmoid.
Each user selection is logged against the alternatives that were on screen,
and the weights move by a pairwise logistic step toward whatever trade-off
the selection revealed.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.special import expit

from .grid import CapacityPolicy, Cell, GridSpec
from .scoring import (
    DEFAULT_TRAVEL_SPEED,
    CostRasters,
    distilled_from_supply,
    score_connectivity,
    score_cost,
    score_coverage,
    score_demand,
)

log = logging.getLogger(__name__)

DEFAULT_WEIGHTS = (1.0, 1.0, 1.0, -0.5)
DEFAULT_LEARNING_RATE = 0.05


class BudgetExhaustedError(RuntimeError):
    """Raised when a selection would exceed the site budget."""


@dataclass(frozen=True)
class StrategyScores:
    """The four normalized strategy layers for one plan state."""

    demand: np.ndarray
    coverage: np.ndarray
    connectivity: np.ndarray
    cost: np.ndarray

    def stack(self) -> np.ndarray:
        return np.stack([self.demand, self.coverage, self.connectivity, self.cost])

    def features_at(self, cell: Cell) -> np.ndarray:
        return self.stack()[:, cell[0], cell[1]].copy()


@dataclass(frozen=True)
class InteractionRecord:
    """One logged selection: what was shown, what was picked, scores at the time."""

    iteration: int
    recommended: tuple[Cell, ...]
    chosen: Cell
    features: np.ndarray  # row r = 4-vector of strategy scores for recommended[r]
    weights_after: tuple[float, ...] | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "iteration": self.iteration,
                "recommended": [list(c) for c in self.recommended],
                "chosen": list(self.chosen),
                "features": np.asarray(self.features).tolist(),
                "weights_after": list(self.weights_after) if self.weights_after else None,
            }
        )


def weighted_sum(scores: StrategyScores, weights: np.ndarray) -> np.ndarray:
    """Pre-sigmoid synthesis; exposed for numerical headroom and rank checks."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (4,):
        raise ValueError(f"expected 4 weights, got shape {weights.shape}")
    if not np.all(np.isfinite(weights)):
        raise ValueError("weights must be finite")
    return np.tensordot(weights, scores.stack(), axes=1)


def comprehensive_score(scores: StrategyScores, weights: np.ndarray) -> np.ndarray:
    """Sigmoid of the weighted strategy sum, entrywise in (0, 1)."""
    return expit(weighted_sum(scores, weights))


def recommend(
    comprehensive: np.ndarray,
    k: int,
    min_separation: float,
    spec: GridSpec,
) -> list[Cell]:
    """Greedy diverse top-k: best remaining cell at least min_separation from picks.

    Ties go to the lower row-major index. May return fewer than k cells when
    suppression exhausts the grid. Output scores are non-increasing.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    values = np.asarray(comprehensive, dtype=float).copy()
    if values.shape != spec.shape:
        raise ValueError(f"score shape {values.shape} does not match grid {spec.shape}")
    ii, jj = np.meshgrid(np.arange(spec.rows), np.arange(spec.cols), indexing="ij")
    selected: list[Cell] = []
    while len(selected) < k and np.any(np.isfinite(values)):
        flat = int(np.argmax(values))
        cell = (flat // spec.cols, flat % spec.cols)
        selected.append(cell)
        if min_separation > 0:
            dist = spec.cell_size * np.sqrt((ii - cell[0]) ** 2 + (jj - cell[1]) ** 2)
            values[dist < min_separation] = -np.inf
        values[cell] = -np.inf
    return selected


def feedback_update(
    weights: np.ndarray,
    record: InteractionRecord,
    learning_rate: float = DEFAULT_LEARNING_RATE,
) -> np.ndarray:
    """One pairwise logistic pass: pull weights toward the chosen cell's trade-off.

    For each shown-but-unchosen alternative u, in recommendation order, the
    step is lr * sigmoid(-w . (x_c - x_u)) * (x_c - x_u): large when the
    current weights disagree with the selection, vanishing when they already
    rank the chosen cell far ahead.
    """
    if learning_rate <= 0:
        raise ValueError(f"learning_rate must be > 0, got {learning_rate}")
    if record.chosen not in record.recommended:
        raise ValueError(f"chosen cell {record.chosen} not among recommended")
    w = np.asarray(weights, dtype=float).copy()
    features = np.asarray(record.features, dtype=float)
    chosen_idx = record.recommended.index(record.chosen)
    x_c = features[chosen_idx]
    for idx in range(len(record.recommended)):
        if idx == chosen_idx:
            continue
        diff = x_c - features[idx]
        w += learning_rate * expit(-float(w @ diff)) * diff
    return w


@dataclass
class PlanningSession:
    """One interactive planning run: a growing plan, live scores, evolving weights.

    Selections are applied strictly in call order; callers wanting concurrent
    access must serialize externally (the HTTP layer holds one lock per
    session).
    """

    spec: GridSpec
    policy: CapacityPolicy
    distilled_demand: np.ndarray
    rasters: CostRasters
    stations: list[Cell]
    weights: np.ndarray = field(default_factory=lambda: np.array(DEFAULT_WEIGHTS))
    top_k: int = 10
    min_separation: float | None = None
    learning_rate: float = DEFAULT_LEARNING_RATE
    travel_speed: float = DEFAULT_TRAVEL_SPEED
    kernel_radius: int | None = None
    log_path: Path | None = None

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=float).copy()
        if self.weights.shape != (4,) or not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be 4 finite reals")
        if self.min_separation is None:
            self.min_separation = self.policy.service_radius
        self.supply = np.zeros(self.spec.shape, dtype=np.int64)
        self.version = 0
        self.iteration = 0
        self.log: list[InteractionRecord] = []
        self._static_connectivity = score_connectivity(self.spec, self.stations, self.travel_speed)
        self._static_cost = score_cost(self.rasters)
        self._refresh()

    @classmethod
    def from_plan_supply(cls, optimized_supply: np.ndarray, **kwargs) -> "PlanningSession":
        return cls(distilled_demand=distilled_from_supply(optimized_supply), **kwargs)

    @property
    def site_count(self) -> int:
        return int(self.supply.sum()) // self.policy.per_site_capacity

    @property
    def scores(self) -> StrategyScores:
        return self._scores

    @property
    def comprehensive(self) -> np.ndarray:
        return self._comprehensive

    @property
    def recommended(self) -> tuple[Cell, ...]:
        return self._recommended

    def _refresh(self) -> None:
        radius = self.policy.service_radius
        self._scores = StrategyScores(
            demand=score_demand(
                self.supply, self.distilled_demand, self.spec, radius, self.kernel_radius
            ),
            coverage=score_coverage(self.supply, self.spec, radius),
            connectivity=self._static_connectivity,
            cost=self._static_cost,
        )
        self._comprehensive = comprehensive_score(self._scores, self.weights)
        self._recommended = tuple(
            recommend(self._comprehensive, self.top_k, self.min_separation, self.spec)
        )
        self._features = np.stack(
            [self._scores.features_at(cell) for cell in self._recommended]
        ) if self._recommended else np.empty((0, 4))

    def set_weights(self, weights: np.ndarray) -> None:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (4,) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be 4 finite reals")
        self.weights = weights.copy()
        self.version += 1
        self._refresh()

    def select(self, cell: Cell) -> InteractionRecord:
        """Place a site at `cell`, learn from the choice, refresh everything.

        A selection outside the current recommendation list still teaches the
        model: the chosen cell joins the comparison set with its own strategy
        scores, so the logged record keeps chosen-in-recommended true.
        """
        cell = (int(cell[0]), int(cell[1]))
        if not self.spec.in_bounds(cell):
            raise ValueError(f"cell {cell} out of bounds for {self.spec.rows}x{self.spec.cols} grid")
        if self.site_count >= self.policy.site_budget:
            raise BudgetExhaustedError(
                f"plan already holds {self.site_count} of {self.policy.site_budget} sites"
            )
        recommended = self._recommended
        features = self._features
        if cell not in recommended:
            recommended = recommended + (cell,)
            features = np.vstack([features, self._scores.features_at(cell)])
        record = InteractionRecord(
            iteration=self.iteration,
            recommended=recommended,
            chosen=cell,
            features=features,
        )
        # zero learning rate means a frozen synthesis layer, still a valid session
        if self.learning_rate > 0 and len(recommended) > 1:
            self.weights = feedback_update(self.weights, record, self.learning_rate)
        record = replace(record, weights_after=tuple(float(w) for w in self.weights))
        self.supply[cell] += self.policy.per_site_capacity
        self.iteration += 1
        self.version += 1
        self._refresh()
        self.log.append(record)
        if self.log_path is not None:
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write(record.to_json() + "\n")
        return record


def simulated_feedback_run(
    target_weights: np.ndarray,
    initial_weights: np.ndarray = DEFAULT_WEIGHTS,
    interactions: int = 200,
    candidates: int = 8,
    seed: int = 0,
    learning_rate: float = DEFAULT_LEARNING_RATE,
    preserve_norm: bool = True,
) -> np.ndarray:
    """Reference convergence scenario: an argmax user with fixed preferences.

    Each round shows `candidates` feature vectors drawn uniformly from [0,1]^4,
    ranked by the learner's current weights; the simulated user always picks
    the one maximizing target_weights . x. Returns the (interactions + 1, 4)
    weight trajectory, initial weights first.

    Only the weight direction carries preference information (the argmax of
    w . x is scale-invariant), and raw pairwise updates inflate the norm as
    they go. With preserve_norm the weights are rescaled to the initial norm
    after each interaction, so the trajectory reports the evolving trade-off
    in units comparable to the starting point.
    """
    rng = np.random.default_rng(seed)
    w = np.asarray(initial_weights, dtype=float).copy()
    target = np.asarray(target_weights, dtype=float)
    initial_norm = float(np.linalg.norm(w))
    history = [w.copy()]
    cells = tuple((0, idx) for idx in range(candidates))
    for it in range(interactions):
        feats = rng.random((candidates, 4))
        feats = feats[np.argsort(-(feats @ w), kind="stable")]
        chosen = cells[int(np.argmax(feats @ target))]
        record = InteractionRecord(iteration=it, recommended=cells, chosen=chosen, features=feats)
        w = feedback_update(w, record, learning_rate)
        if preserve_norm:
            w *= initial_norm / float(np.linalg.norm(w))
        history.append(w.copy())
    return np.stack(history)
