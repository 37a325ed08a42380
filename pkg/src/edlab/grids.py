"""Discretized 1D Hilbert space on a uniform position grid.

The position grid uses a half-cell offset, x_i = x_min + (i + 1/2) dx, so
that on a symmetric domain the reflection x -> -x is an exact index
reversal.  The conjugate momentum grid p_k = 2*pi*hbar*k/(n*dx) (signed
index k in [-n/2, n/2)) is stored in ascending order.  Transforms between
the two representations are unitary with respect to the dx / dp measures,
so Parseval holds to machine precision.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

BasisName = Literal["position", "momentum"]

NORM_TOL = 1e-10
BOUNDARY_TOL = 1e-10
# Probability mass allowed in the top 10% of |p| (the near-Nyquist band).
# Compact-support states have algebraic momentum tails, so this gate is
# looser than the smooth-state floor would suggest; see package notes.
ALIASING_TOL = 1e-5
N_BOUNDARY_POINTS = 2


class InvariantViolation(ValueError):
    """A physics-level invariant (norm, confinement, aliasing, ...) failed."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform position grid plus its spectral momentum grid.

    Attributes
    ----------
    n_points : number of grid points, a power of two >= 16
    x_min, x_max : domain edges (grid points sit strictly inside)
    hbar : value of the reduced Planck constant (default 1)
    """

    n_points: int
    x_min: float
    x_max: float
    hbar: float = 1.0

    def __post_init__(self):
        n = self.n_points
        if n < 16 or (n & (n - 1)) != 0:
            raise ValueError(f"n_points must be a power of two >= 16, got {n}")
        if not self.x_max > self.x_min:
            raise ValueError(f"x_max must exceed x_min, got [{self.x_min}, {self.x_max}]")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def x(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_points) + 0.5) * self.dx

    @property
    def dp(self) -> float:
        return 2.0 * np.pi * self.hbar / (self.n_points * self.dx)

    @property
    def p(self) -> np.ndarray:
        """Momentum grid in ascending order, signed index in [-n/2, n/2)."""
        return (np.arange(self.n_points) - self.n_points // 2) * self.dp

    @property
    def center(self) -> float:
        return 0.5 * (self.x_min + self.x_max)

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        scale = max(abs(self.x_min), abs(self.x_max), 1.0)
        return abs(self.x_min + self.x_max) <= tol * scale


def make_grid(n_points: int, x_min: float, x_max: float, hbar: float = 1.0) -> GridSpec:
    """Build a GridSpec, validating all invariants."""
    return GridSpec(int(n_points), float(x_min), float(x_max), float(hbar))


@dataclass(frozen=True)
class WaveFunction:
    """Complex amplitudes on a grid, in position or momentum representation.

    Amplitudes carry units coordinate^(-1/2): sum |a_i|^2 * spacing = 1 for a
    normalized state.  Construction checks only shape and finiteness;
    ``validate`` enforces the full set of state invariants and is called by
    every state factory.  Channel intermediates (slit branches in
    particular) deliberately skip revalidation.
    """

    grid: GridSpec
    amplitudes: np.ndarray
    space: BasisName = "position"

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != (self.grid.n_points,):
            raise ValueError(
                f"amplitudes shape {a.shape} does not match grid ({self.grid.n_points},)"
            )
        if not np.all(np.isfinite(a.view(float))):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", a)

    @property
    def coordinates(self) -> np.ndarray:
        return self.grid.x if self.space == "position" else self.grid.p

    @property
    def spacing(self) -> float:
        return self.grid.dx if self.space == "position" else self.grid.dp

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2) * self.spacing))

    def validate(self) -> "WaveFunction":
        """Check normalization, boundary confinement and aliasing control.

        Raises InvariantViolation on the first failed check and returns self
        otherwise, so factories can end with ``return psi.validate()``.
        """
        nrm = self.norm()
        if abs(nrm - 1.0) > NORM_TOL:
            raise InvariantViolation(f"state norm {nrm!r} deviates from 1 beyond {NORM_TOL}")
        edge = np.concatenate(
            (self.amplitudes[:N_BOUNDARY_POINTS], self.amplitudes[-N_BOUNDARY_POINTS:])
        )
        edge_mass = np.abs(edge) ** 2 * self.spacing
        if np.any(edge_mass > BOUNDARY_TOL):
            raise InvariantViolation(
                f"boundary confinement violated: edge probability {edge_mass.max():.3e} "
                f"exceeds {BOUNDARY_TOL}"
            )
        mom = self if self.space == "momentum" else to_momentum(self)
        p = mom.grid.p
        band = np.abs(p) >= 0.9 * np.abs(p).max()
        band_mass = float(np.sum(np.abs(mom.amplitudes[band]) ** 2) * mom.grid.dp)
        if band_mass > ALIASING_TOL:
            raise InvariantViolation(
                f"aliasing control violated: near-Nyquist momentum mass {band_mass:.3e} "
                f"exceeds {ALIASING_TOL}"
            )
        return self


def kernel_transform(
    arr: np.ndarray,
    axis: int,
    src0: float,
    src_step: float,
    dst0: float,
    dst_step: float,
    hbar: float,
    sign: int,
) -> np.ndarray:
    """Unitary plane-wave transform along one axis of an array.

    Computes out_j = src_step / sqrt(2*pi*hbar) * sum_i arr_i *
    exp(sign * 1j * c_j * d_i / hbar) where d_i = src0 + i*src_step are the
    source coordinates and c_j = dst0 + j*dst_step the destination ones.
    Requires the duality condition src_step * dst_step = 2*pi*hbar / n, which
    lets the double sum collapse onto a single FFT with two phase vectors.
    """
    n = arr.shape[axis]
    if abs(src_step * dst_step * n / (2.0 * np.pi * hbar) - 1.0) > 1e-9:
        raise ValueError("grids are not conjugate: src_step * dst_step != 2*pi*hbar/n")
    idx = np.arange(n)
    inner = np.exp(sign * 1j * dst0 * (src0 + idx * src_step) / hbar)
    outer = np.exp(sign * 1j * (idx * dst_step) * src0 / hbar)
    shape = [1] * arr.ndim
    shape[axis] = n
    work = arr * inner.reshape(shape)
    if sign < 0:
        core = np.fft.fft(work, axis=axis)
    else:
        core = np.fft.ifft(work, axis=axis) * n
    return (src_step / np.sqrt(2.0 * np.pi * hbar)) * outer.reshape(shape) * core


def to_momentum(psi: WaveFunction) -> WaveFunction:
    """Forward transform onto the conjugate grid.

    Mapping a position-space state yields its momentum representation.
    Applying the same forward kernel to a momentum-space state lands back in
    position space with the argument reflected, psi(-x), which is the parity
    identity of the continuum transform and holds here to grid precision.
    """
    g = psi.grid
    if psi.space == "position":
        out = kernel_transform(psi.amplitudes, 0, g.x[0], g.dx, g.p[0], g.dp, g.hbar, -1)
        return WaveFunction(g, out, "momentum")
    out = kernel_transform(psi.amplitudes, 0, g.p[0], g.dp, g.x[0], g.dx, g.hbar, -1)
    return WaveFunction(g, out, "position")


def to_position(phi: WaveFunction) -> WaveFunction:
    """Inverse transform of ``to_momentum`` on a momentum-space state."""
    if phi.space != "momentum":
        raise ValueError("to_position expects a momentum-space state")
    g = phi.grid
    out = kernel_transform(phi.amplitudes, 0, g.p[0], g.dp, g.x[0], g.dx, g.hbar, +1)
    return WaveFunction(g, out, "position")


def apply_position_operator(psi: WaveFunction) -> np.ndarray:
    if psi.space != "position":
        raise ValueError("position operator acts on position-space states")
    return psi.grid.x * psi.amplitudes


def apply_momentum_operator(psi: WaveFunction) -> np.ndarray:
    """Apply the momentum operator spectrally (never by finite differences)."""
    if psi.space != "position":
        raise ValueError("momentum operator acts on position-space states here")
    g = psi.grid
    phi = kernel_transform(psi.amplitudes, 0, g.x[0], g.dx, g.p[0], g.dp, g.hbar, -1)
    return kernel_transform(g.p * phi, 0, g.p[0], g.dp, g.x[0], g.dx, g.hbar, +1)


@dataclass(frozen=True)
class Moments:
    mean_x: float
    delta_x: float
    mean_p: float
    delta_p: float


def _mean_std(coords: np.ndarray, weights: np.ndarray, spacing: float) -> tuple[float, float]:
    w = weights * spacing
    m = float(np.sum(coords * w))
    var = float(np.sum(coords**2 * w)) - m * m
    return m, float(np.sqrt(max(var, 0.0)))


def moments(psi: WaveFunction) -> Moments:
    """First and second moments of X and P for a position-space state.

    <P> and Delta P are evaluated by spectral multiplication on the momentum
    grid; compact-support states have slowly decaying momentum tails that a
    finite-difference stencil would misrepresent.
    """
    if psi.space != "position":
        raise ValueError("moments expects a position-space state")
    g = psi.grid
    mean_x, delta_x = _mean_std(g.x, np.abs(psi.amplitudes) ** 2, g.dx)
    phi = to_momentum(psi)
    mean_p, delta_p = _mean_std(g.p, np.abs(phi.amplitudes) ** 2, g.dp)
    return Moments(mean_x, delta_x, mean_p, delta_p)


@dataclass(frozen=True)
class ProbabilityDistribution:
    """Nonnegative weights on an ascending uniform support.

    Weights are densities with respect to the support spacing:
    sum(weights) * spacing == 1.
    """

    support: np.ndarray
    weights: np.ndarray
    spacing: float = field(default=0.0)

    def __post_init__(self):
        s = np.asarray(self.support, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if s.shape != w.shape or s.ndim != 1:
            raise ValueError("support and weights must be 1D arrays of equal length")
        spacing = self.spacing if self.spacing else float(s[1] - s[0])
        if np.min(w) < -1e-10:
            raise InvariantViolation(f"negative weight {w.min():.3e} below tolerance")
        w = np.maximum(w, 0.0)
        total = float(np.sum(w) * spacing)
        if abs(total - 1.0) > NORM_TOL:
            raise InvariantViolation(f"distribution mass {total!r} deviates from 1")
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "spacing", spacing)

    def mean(self) -> float:
        return float(np.sum(self.support * self.weights) * self.spacing)

    def std(self) -> float:
        m = self.mean()
        var = float(np.sum(self.support**2 * self.weights) * self.spacing) - m * m
        return float(np.sqrt(max(var, 0.0)))


def distribution(psi: WaveFunction, basis: BasisName) -> ProbabilityDistribution:
    """|amplitude|^2 on the requested grid."""
    if basis == psi.space:
        rep = psi
    elif basis == "momentum" and psi.space == "position":
        rep = to_momentum(psi)
    elif basis == "position" and psi.space == "momentum":
        rep = to_position(psi)
    else:
        raise ValueError(f"unknown basis {basis!r}")
    return ProbabilityDistribution(rep.coordinates, np.abs(rep.amplitudes) ** 2, rep.spacing)


def wavefunction_to_csv(psi: WaveFunction, path: str) -> None:
    """Write (coordinate, re, im) rows; floats carry 12 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["coordinate", "re", "im"])
        for c, a in zip(psi.coordinates, psi.amplitudes):
            w.writerow([f"{c:.12g}", f"{a.real:.12g}", f"{a.imag:.12g}"])


def distribution_to_csv(dist: ProbabilityDistribution, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["coordinate", "weight"])
        for c, wt in zip(dist.support, dist.weights):
            w.writerow([f"{c:.12g}", f"{wt:.12g}"])
