import numpy as np
import pytest

from edlab import (
    BumpState,
    GaussianState,
    GridSpec,
    ProbeSpec,
    RandomState,
    SymmetricPairState,
    VonNeumannChannel,
    make_grid,
    make_state,
    probe_grid_for,
)


@pytest.fixture(scope="session")
def std_grid() -> GridSpec:
    return make_grid(256, -16.0, 16.0)


@pytest.fixture(scope="session")
def corpus(std_grid):
    """Mixed bag of valid states covering every factory."""
    specs = [
        GaussianState(0.0, 0.0, 1.0),
        GaussianState(3.0, 0.0, 1.0),
        GaussianState(0.0, 2.0, 1.0),
        GaussianState(-2.0, -1.0, 1.5),
        GaussianState(1.0, 0.5, 2.0),
        BumpState(0.0, 1.0),
        BumpState(1.0, 1.0),
        BumpState(0.0, 2.0),
        BumpState(-1.0, 1.5),
        SymmetricPairState(3.0, 1.0),
        SymmetricPairState(0.0, 1.0),
    ] + [RandomState(seed, 6) for seed in range(10)]
    return [(spec, make_state(std_grid, spec)) for spec in specs]


def make_vn_channel(grid, psi, g: float, s: float, n_probe: int = 256) -> VonNeumannChannel:
    probe_grid = probe_grid_for(grid, psi, g, s, n_probe)
    return VonNeumannChannel(g, ProbeSpec(probe_grid, s))


@pytest.fixture(scope="session")
def vn_default(std_grid):
    psi = make_state(std_grid, GaussianState(0.0, 0.0, 1.0))
    return make_vn_channel(std_grid, psi, 1.0, 0.5), psi


def rel_err(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b))


def random_amplitudes(grid: GridSpec, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(grid.n_points) + 1j * rng.standard_normal(grid.n_points)
    return a / np.sqrt(np.sum(np.abs(a) ** 2) * grid.dx)
