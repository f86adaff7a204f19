import numpy as np
import pytest

from vertiplan.grid import CapacityPolicy, GridSpec


@pytest.fixture
def spec3x3() -> GridSpec:
    return GridSpec(rows=3, cols=3, cell_size=200.0, time_bins=2)


@pytest.fixture
def policy() -> CapacityPolicy:
    return CapacityPolicy(per_site_capacity=20, site_budget=4, service_radius=1000.0)


@pytest.fixture(scope="session")
def benchmark():
    """The frozen synthetic benchmark, generated once per test session."""
    from vertiplan.synthetic import generate

    return generate(seed=7, flights=9000)


def random_instance(rng: np.random.Generator, max_side: int = 20, max_bins: int = 8,
                    max_entry: int = 6, capacity_unit: int = 1):
    """One random matching instance: spec, demand tensor, supply matrix, radius."""
    rows = int(rng.integers(1, max_side + 1))
    cols = int(rng.integers(1, max_side + 1))
    bins = int(rng.integers(1, max_bins + 1))
    spec = GridSpec(rows=rows, cols=cols, cell_size=200.0, time_bins=bins)
    demand = rng.integers(0, max_entry + 1, size=(bins, rows, cols)).astype(np.int64)
    supply = rng.integers(0, max_entry + 1, size=(rows, cols)).astype(np.int64) * capacity_unit
    radius = float(rng.choice([0.0, 200.0, 400.0, 600.0, 1000.0]))
    return spec, demand, supply, radius
