"""Capacity-constrained supply-demand matching.

Matching runs independently per time bin (capacity renews each bin) in three
stages: same-cell clearance, overflow of leftover demand to in-range leftover
supply, and backward mapping so unmet demand stays attributed to the cell it
originated in.

Overflow assignment is deterministic: origin cells are processed in row-major
order, and each origin drains in-range residual supply nearest-first (ties by
row-major target index) until its demand is exhausted or nothing reachable
remains. Demand splits at unit granularity across several supply cells.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Cell, GridSpec, disk_offsets

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

Flow = tuple[Cell, Cell, int]


@dataclass(frozen=True)
class StageResult:
    """Per-cell residuals after same-cell clearance for one time bin."""

    residual_demand: np.ndarray
    residual_supply: np.ndarray


@dataclass(frozen=True)
class MatchResult:
    """Final residuals per bin; unmet demand is located at its origin cell."""

    final_residual_demand: np.ndarray
    final_residual_supply: np.ndarray
    served_flows: list[list[Flow]] | None = None


def local_clearance(demand_slice: np.ndarray, supply: np.ndarray) -> StageResult:
    """Match demand and supply within each cell; residuals cannot coexist."""
    demand_slice = np.asarray(demand_slice, dtype=np.int64)
    supply = np.asarray(supply, dtype=np.int64)
    if demand_slice.shape != supply.shape:
        raise ValueError(f"demand slice {demand_slice.shape} vs supply {supply.shape} shape mismatch")
    return StageResult(
        residual_demand=np.maximum(demand_slice - supply, 0),
        residual_supply=np.maximum(supply - demand_slice, 0),
    )


@njit(cache=True)
def _drain_overflow(rd, rs, offsets, rows, cols, flows, record):  # pragma: no cover - jit
    """Greedy overflow pass on flat residual arrays; returns flow count.

    Every recorded flow exhausts either its origin's demand or its target's
    supply, so at most rows*cols entries of each kind occur and the flows
    buffer never needs more than 2*rows*cols rows.
    """
    n_flows = 0
    n_offsets = offsets.shape[0]
    for i in range(rows):
        for j in range(cols):
            d = rd[i * cols + j]
            if d == 0:
                continue
            for k in range(n_offsets):
                ti = i + offsets[k, 0]
                tj = j + offsets[k, 1]
                if ti < 0 or ti >= rows or tj < 0 or tj >= cols:
                    continue
                s = rs[ti * cols + tj]
                if s == 0:
                    continue
                m = d if d < s else s
                d -= m
                rs[ti * cols + tj] = s - m
                if record:
                    flows[n_flows, 0] = i
                    flows[n_flows, 1] = j
                    flows[n_flows, 2] = ti
                    flows[n_flows, 3] = tj
                    flows[n_flows, 4] = m
                    n_flows += 1
                if d == 0:
                    break
            rd[i * cols + j] = d
    return n_flows


def redistribute(
    stage1: StageResult,
    spec: GridSpec,
    radius: float,
    record_flows: bool = False,
) -> tuple[list[Flow], np.ndarray, np.ndarray]:
    """Overflow residual demand to in-range residual supply.

    Returns (flows, final residual demand, final residual supply) for one
    bin. Unassigned demand is reported at its origin cell. The pass is
    exhaustive: afterwards no origin with leftover demand has any in-range
    cell with leftover supply.
    """
    rows, cols = spec.rows, spec.cols
    rd = stage1.residual_demand.astype(np.int64).ravel().copy()
    rs = stage1.residual_supply.astype(np.int64).ravel().copy()
    offsets = disk_offsets(spec, radius)
    flows_buf = np.empty((2 * rows * cols if record_flows else 1, 5), dtype=np.int64)
    n_flows = _drain_overflow(rd, rs, offsets, rows, cols, flows_buf, record_flows)
    flows: list[Flow] = []
    if record_flows:
        for r in range(n_flows):
            oi, oj, ti, tj, units = flows_buf[r]
            flows.append(((int(oi), int(oj)), (int(ti), int(tj)), int(units)))
    return flows, rd.reshape(rows, cols), rs.reshape(rows, cols)


def match(
    demand: np.ndarray,
    supply: np.ndarray,
    spec: GridSpec,
    radius: float,
    record_flows: bool = False,
) -> MatchResult:
    """Run clearance and overflow for every time bin; supply renews per bin.

    The tensor sets its own bin count (a distilled single-bin tensor is as
    valid as a full day); the spec contributes the spatial geometry.
    """
    demand = np.asarray(demand, dtype=np.int64)
    supply = np.asarray(supply, dtype=np.int64)
    if demand.ndim != 3 or demand.shape[1:] != spec.shape:
        raise ValueError(f"demand shape {demand.shape} does not fit grid {spec.shape}")
    if supply.shape != spec.shape:
        raise ValueError(f"supply shape {supply.shape} does not match grid {spec.shape}")
    bins = demand.shape[0]
    frd = np.empty_like(demand)
    frs = np.empty((bins, spec.rows, spec.cols), dtype=np.int64)
    all_flows: list[list[Flow]] | None = [] if record_flows else None
    for t in range(bins):
        stage1 = local_clearance(demand[t], supply)
        flows, frd_t, frs_t = redistribute(stage1, spec, radius, record_flows=record_flows)
        frd[t] = frd_t
        frs[t] = frs_t
        if all_flows is not None:
            all_flows.append(flows)
    return MatchResult(final_residual_demand=frd, final_residual_supply=frs, served_flows=all_flows)


def total_loss(result: MatchResult) -> int:
    """Total unmet demand across all bins and cells."""
    return int(result.final_residual_demand.sum())
