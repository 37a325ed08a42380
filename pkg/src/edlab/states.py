"""Factories for the state families the error/disturbance scenarios need.

Four families: Gaussian wave packets, compact-support cos^2 bumps (exactly
zero outside their support, C^1 at the edges), even two-packet
superpositions, and seeded random superpositions of low-order oscillator
eigenfunctions for property-test corpora.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .grids import GridSpec, InvariantViolation, WaveFunction

MIN_CELLS_PER_SIGMA = 8
GAUSSIAN_MARGIN_SIGMAS = 4.0


@dataclass(frozen=True)
class GaussianState:
    x0: float
    p0: float
    sigma: float


@dataclass(frozen=True)
class BumpState:
    center: float
    halfwidth: float


@dataclass(frozen=True)
class SymmetricPairState:
    separation: float
    sigma: float


@dataclass(frozen=True)
class RandomState:
    seed: int
    smoothness: int = 6


StateSpec = Union[GaussianState, BumpState, SymmetricPairState, RandomState]


def _check_sigma(grid: GridSpec, sigma: float) -> None:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if sigma < MIN_CELLS_PER_SIGMA * grid.dx:
        raise InvariantViolation(
            f"sigma {sigma} too small to resolve: fewer than {MIN_CELLS_PER_SIGMA} "
            f"grid points per sigma (dx={grid.dx})"
        )


def _check_margin(grid: GridSpec, lo: float, hi: float, what: str) -> None:
    if lo < grid.x_min or hi > grid.x_max:
        raise InvariantViolation(
            f"{what} spans [{lo}, {hi}], outside grid domain [{grid.x_min}, {grid.x_max}]"
        )


def _normalized(grid: GridSpec, amplitudes: np.ndarray) -> WaveFunction:
    nrm = np.sqrt(np.sum(np.abs(amplitudes) ** 2) * grid.dx)
    return WaveFunction(grid, amplitudes / nrm, "position")


def gaussian_amplitudes(grid: GridSpec, x0: float, p0: float, sigma: float) -> np.ndarray:
    """Unnormalized minimum-uncertainty packet: DeltaX = sigma, <P> = p0."""
    x = grid.x
    envelope = (2.0 * np.pi * sigma**2) ** (-0.25) * np.exp(-((x - x0) ** 2) / (4.0 * sigma**2))
    return envelope * np.exp(1j * p0 * x / grid.hbar)


def _hermite_functions(x: np.ndarray, k_max: int) -> list[np.ndarray]:
    # Stable recurrence for the L2-normalized oscillator eigenfunctions.
    h = [np.pi**-0.25 * np.exp(-0.5 * x**2)]
    if k_max >= 1:
        h.append(np.sqrt(2.0) * x * h[0])
    for k in range(1, k_max):
        h.append(np.sqrt(2.0 / (k + 1)) * x * h[k] - np.sqrt(k / (k + 1)) * h[k - 1])
    return h


def make_state(grid: GridSpec, spec: StateSpec) -> WaveFunction:
    """Build a normalized, fully validated WaveFunction from a StateSpec.

    Raises InvariantViolation when the requested feature does not fit the
    grid (margin rules below) or when the resulting state fails any
    WaveFunction invariant.
    """
    if isinstance(spec, GaussianState):
        _check_sigma(grid, spec.sigma)
        m = GAUSSIAN_MARGIN_SIGMAS * spec.sigma
        _check_margin(grid, spec.x0 - m, spec.x0 + m, "gaussian feature")
        amp = gaussian_amplitudes(grid, spec.x0, spec.p0, spec.sigma)
    elif isinstance(spec, BumpState):
        if not spec.halfwidth > 0:
            raise ValueError(f"halfwidth must be positive, got {spec.halfwidth}")
        _check_margin(
            grid,
            spec.center - spec.halfwidth - grid.dx,
            spec.center + spec.halfwidth + grid.dx,
            "bump support",
        )
        x = grid.x
        inside = np.abs(x - spec.center) <= spec.halfwidth
        # exact zeros outside the support, not merely small values
        amp = np.where(
            inside,
            np.cos(np.pi * (x - spec.center) / (2.0 * spec.halfwidth)) ** 2,
            0.0,
        ).astype(complex)
    elif isinstance(spec, SymmetricPairState):
        _check_sigma(grid, spec.sigma)
        if spec.separation < 0:
            raise ValueError("separation must be nonnegative")
        c = grid.center
        half = 0.5 * spec.separation
        m = GAUSSIAN_MARGIN_SIGMAS * spec.sigma
        _check_margin(grid, c - half - m, c + half + m, "symmetric pair")
        x = grid.x
        amp = (
            np.exp(-((x - c - half) ** 2) / (4.0 * spec.sigma**2))
            + np.exp(-((x - c + half) ** 2) / (4.0 * spec.sigma**2))
        ).astype(complex)
    elif isinstance(spec, RandomState):
        if spec.smoothness < 0:
            raise ValueError("smoothness must be a nonnegative integer")
        rng = np.random.default_rng(spec.seed)
        k_max = int(spec.smoothness)
        coeffs = rng.standard_normal(k_max + 1) + 1j * rng.standard_normal(k_max + 1)
        basis = _hermite_functions(grid.x - grid.center, k_max)
        amp = np.zeros(grid.n_points, dtype=complex)
        for c, h in zip(coeffs, basis):
            amp += c * h
    else:
        raise TypeError(f"unknown state spec {spec!r}")
    return _normalized(grid, amp).validate()


def is_symmetric(psi: WaveFunction, about: float) -> tuple[bool, float]:
    """Test amplitude-level evenness about the domain center.

    Returns (flag, asymmetry_norm) with asymmetry = ||psi(x) - psi(2*about - x)||.
    The reflection axis must be the domain center: only there is reflection an
    exact index permutation of the half-offset grid.
    """
    g = psi.grid
    if psi.space != "position":
        raise ValueError("is_symmetric expects a position-space state")
    scale = max(abs(g.x_min), abs(g.x_max), 1.0)
    if abs(about - g.center) > 1e-12 * scale:
        raise ValueError(
            f"reflection axis {about} is not the domain center {g.center}; "
            "reflection would require interpolation"
        )
    diff = psi.amplitudes - psi.amplitudes[::-1]
    asym = float(np.sqrt(np.sum(np.abs(diff) ** 2) * g.dx))
    return asym < 1e-10, asym
