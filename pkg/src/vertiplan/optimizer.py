"""Greedy network improvement with tabu memory.

Each round relocates capacity from the most chronically underused cell to the
cell with the highest smoothed unmet demand (or only adds / only removes,
depending on mode). Cells that flip between removal and addition in
consecutive touches go on a tabu list for a fixed number of iterations to
damp oscillation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import convolve2d

from .grid import CapacityPolicy, Cell, GridSpec, validate_supply
from .matching import MatchResult, match, total_loss

log = logging.getLogger(__name__)

MODES = ("relocate", "add_only", "remove_only")


@dataclass(frozen=True)
class OptimizerConfig:
    iterations: int
    kernel_radius: int
    tabu_tenure: int = 10
    mode: str = "relocate"

    def __post_init__(self) -> None:
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if self.kernel_radius < 0:
            raise ValueError(f"kernel_radius must be >= 0, got {self.kernel_radius}")
        if self.tabu_tenure < 0:
            raise ValueError(f"tabu_tenure must be >= 0, got {self.tabu_tenure}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


def default_kernel_radius(policy: CapacityPolicy, spec: GridSpec) -> int:
    """Smoothing reach matching the service reach, in cells."""
    return int(policy.service_radius // spec.cell_size)


@dataclass
class OptimizerState:
    """Mutable optimization state; one instance per completed iteration."""

    supply: np.ndarray
    tabu: dict[Cell, int] = field(default_factory=dict)
    last_action: dict[Cell, str] = field(default_factory=dict)
    loss_history: list[tuple[int, int]] = field(default_factory=list)
    iteration: int = 0
    # match result for the current supply, to avoid re-matching next step
    cached_result: MatchResult | None = field(default=None, repr=False)


def aggregate_and_smooth(values: np.ndarray, kernel_radius: int) -> np.ndarray:
    """Sum a T x M x N field over time, then box-smooth with an all-ones kernel.

    The kernel is (2*kernel_radius + 1) square with zero padding at borders;
    radius 0 returns the plain temporal sum.
    """
    values = np.asarray(values)
    if values.ndim != 3:
        raise ValueError(f"expected a T x M x N field, got shape {values.shape}")
    summed = values.sum(axis=0)
    if kernel_radius == 0:
        return summed
    size = 2 * kernel_radius + 1
    kernel = np.ones((size, size), dtype=summed.dtype)
    return convolve2d(summed, kernel, mode="same", boundary="fill", fillvalue=0)


def _argmax_cell(values: np.ndarray) -> Cell:
    flat = int(np.argmax(values))
    return (flat // values.shape[1], flat % values.shape[1])


def select_addition(smoothed_frd: np.ndarray, tabu: set[Cell]) -> Cell | None:
    """Non-tabu cell with the highest smoothed unmet demand, ties row-major."""
    values = np.asarray(smoothed_frd, dtype=float).copy()
    for cell in tabu:
        values[cell] = -np.inf
    if not np.any(np.isfinite(values)):
        return None
    return _argmax_cell(values)


def select_removal(
    aggregated_frs: np.ndarray,
    tabu: set[Cell],
    supply: np.ndarray,
    per_site_capacity: int,
) -> Cell | None:
    """Non-tabu cell with capacity to spare and the highest summed leftover supply."""
    eligible = np.asarray(supply) >= per_site_capacity
    for cell in tabu:
        eligible[cell] = False
    if not eligible.any():
        return None
    values = np.where(eligible, np.asarray(aggregated_frs, dtype=float), -np.inf)
    return _argmax_cell(values)


def step(
    state: OptimizerState,
    demand: np.ndarray,
    spec: GridSpec,
    policy: CapacityPolicy,
    config: OptimizerConfig,
) -> OptimizerState:
    """Run one optimization round and return the successor state.

    The new state's loss history gains one entry (two on the very first step,
    which also records the starting loss). In relocate mode the removal and
    addition happen together or not at all, keeping total capacity constant.
    """
    result = state.cached_result
    if result is None:
        result = match(demand, state.supply, spec, policy.service_radius)
    loss_history = list(state.loss_history)
    if not loss_history:
        loss_history.append((state.iteration, total_loss(result)))

    tabu = dict(state.tabu)
    last_action = dict(state.last_action)
    active_tabu = {cell for cell, expiry in tabu.items() if state.iteration < expiry}
    supply = state.supply.copy()
    p = policy.per_site_capacity

    removal: Cell | None = None
    addition: Cell | None = None
    if config.mode in ("relocate", "remove_only"):
        frs_sum = result.final_residual_supply.sum(axis=0)
        removal = select_removal(frs_sum, active_tabu, supply, p)
        if removal is None:
            log.warning("iteration %d: removal skipped, no eligible non-tabu cell", state.iteration)
    if config.mode == "add_only" or (config.mode == "relocate" and removal is not None):
        smoothed = aggregate_and_smooth(result.final_residual_demand, config.kernel_radius)
        addition = select_addition(smoothed, active_tabu)
        if addition is None:
            log.warning("iteration %d: addition skipped, all cells tabu", state.iteration)
    if config.mode == "relocate" and (removal is None or addition is None):
        removal = addition = None

    actions: list[tuple[Cell, str]] = []
    if removal is not None:
        supply[removal] -= p
        actions.append((removal, "removed"))
    if addition is not None:
        supply[addition] += p
        actions.append((addition, "added"))

    for cell, action in actions:
        previous = last_action.get(cell)
        if previous is not None and previous != action:
            tabu[cell] = state.iteration + config.tabu_tenure
        last_action[cell] = action

    new_result = match(demand, supply, spec, policy.service_radius) if actions else result
    loss_history.append((state.iteration + 1, total_loss(new_result)))
    return OptimizerState(
        supply=supply,
        tabu=tabu,
        last_action=last_action,
        loss_history=loss_history,
        iteration=state.iteration + 1,
        cached_result=new_result,
    )


def optimize(
    demand: np.ndarray,
    initial: np.ndarray,
    spec: GridSpec,
    policy: CapacityPolicy,
    config: OptimizerConfig,
) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Iterate `step` and return the best-seen supply plus the full loss curve.

    The curve has iterations + 1 points (initial state included). The best
    supply is the earliest state attaining the minimal observed loss, which
    need not be the final iterate.
    """
    initial = np.asarray(initial, dtype=np.int64)
    violations = validate_supply(initial, policy, enforce_total=(config.mode == "relocate"))
    if violations:
        raise ValueError("infeasible initial supply: " + "; ".join(v.message for v in violations))

    state = OptimizerState(supply=initial.copy())
    state.cached_result = match(demand, state.supply, spec, policy.service_radius)
    state.loss_history.append((0, total_loss(state.cached_result)))

    best_supply = state.supply.copy()
    best_loss = state.loss_history[0][1]
    for _ in range(config.iterations):
        state = step(state, demand, spec, policy, config)
        _, loss = state.loss_history[-1]
        if loss < best_loss:
            best_loss = loss
            best_supply = state.supply.copy()
    return best_supply, list(state.loss_history)
