"""The processes whose disturbance we quantify.

Three channels: the parity flip (unitary), the slit check (a two-outcome
projective Kraus pair), and the von Neumann position-probe coupling
U = exp(-i g X_s P_p / hbar) on system (x) probe.  The coupling is applied as
an exact conditional shift: for each system column at x_i the probe is
translated by g*x_i through momentum-space phases, which is unitary to
machine precision at any coupling strength.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .grids import (
    GridSpec,
    InvariantViolation,
    ProbabilityDistribution,
    WaveFunction,
    kernel_transform,
)
from .states import gaussian_amplitudes

CONFINEMENT_TOL = 1e-10
ZERO_BRANCH_TOL = 1e-14


class ConfinementError(InvariantViolation):
    """A conditional shift pushed significant probe mass to the grid edge."""


@dataclass(frozen=True)
class ProbeSpec:
    """Probe grid plus its ready state: an unbiased Gaussian pointer of width s.

    The pointer may be narrower than the grid spacing suggests; its gate is
    the aliasing invariant (band-limited content), not the cells-per-sigma
    rule used for system states.
    """

    grid: GridSpec
    s: float
    ready_state: WaveFunction = field(init=False)

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError(f"pointer width must be positive, got {self.s}")
        amp = gaussian_amplitudes(self.grid, 0.0, 0.0, self.s)
        amp = amp / np.sqrt(np.sum(np.abs(amp) ** 2) * self.grid.dx)
        ready = WaveFunction(self.grid, amp, "position").validate()
        mean = float(np.sum(self.grid.x * np.abs(ready.amplitudes) ** 2) * self.grid.dx)
        if abs(mean) > 1e-10:
            raise InvariantViolation(f"pointer bias <X_probe> = {mean:.3e}")
        object.__setattr__(self, "ready_state", ready)


def make_probe(grid: GridSpec, s: float) -> ProbeSpec:
    return ProbeSpec(grid, float(s))


def probe_grid_for(
    system_grid: GridSpec,
    psi: WaveFunction,
    g: float,
    s: float,
    n_points: int = 256,
) -> GridSpec:
    """Auto-size a probe grid so the conditional shifts stay confined.

    The half-domain covers the largest significant shift g*|x| (support of
    psi at the 1e-14 probability level) plus a generous pointer margin.  The
    ready state's own validation then rejects widths the resulting spacing
    cannot represent.
    """
    w = np.abs(psi.amplitudes) ** 2 * system_grid.dx
    sig = np.abs(system_grid.x[w > 1e-14])
    reach = float(sig.max()) if sig.size else abs(system_grid.x).max()
    half = abs(g) * reach + 12.0 * s
    return GridSpec(n_points, -half, half, system_grid.hbar)


@dataclass(frozen=True)
class FlipChannel:
    pass


@dataclass(frozen=True)
class SlitChannel:
    center: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"slit width must be positive, got {self.width}")


@dataclass(frozen=True)
class VonNeumannChannel:
    g: float
    probe: ProbeSpec

    def __post_init__(self):
        if self.g == 0:
            raise ValueError("coupling gain g must be nonzero")


Channel = Union[FlipChannel, SlitChannel, VonNeumannChannel]


@dataclass(frozen=True)
class JointState:
    """Amplitudes indexed (system point, probe point), unit total norm."""

    system_grid: GridSpec
    probe_grid: GridSpec
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        expected = (self.system_grid.n_points, self.probe_grid.n_points)
        if a.shape != expected:
            raise ValueError(f"joint amplitudes shape {a.shape}, expected {expected}")
        object.__setattr__(self, "amplitudes", a)

    @property
    def measure(self) -> float:
        return self.system_grid.dx * self.probe_grid.dx

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2) * self.measure))

    def system_marginal(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1) * self.probe_grid.dx

    def probe_marginal(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=0) * self.system_grid.dx


def apply_flip(psi: WaveFunction) -> WaveFunction:
    """Reverse the position wave function: psi'(x_i) = psi(x_{n-1-i}).

    Exact index permutation (hence exactly norm-preserving); requires a
    domain symmetric about 0 so that x_{n-1-i} = -x_i.
    """
    if psi.space != "position":
        raise ValueError("flip acts on position-space states")
    if not psi.grid.is_symmetric():
        raise InvariantViolation(
            f"flip requires a domain symmetric about 0, got [{psi.grid.x_min}, {psi.grid.x_max}]"
        )
    return WaveFunction(psi.grid, psi.amplitudes[::-1].copy(), "position")


@dataclass(frozen=True)
class SlitOutcome:
    pass_state: WaveFunction | None
    pass_probability: float
    fail_state: WaveFunction | None
    fail_probability: float


def slit_mask(grid: GridSpec, center: float, width: float) -> np.ndarray:
    if center - 0.5 * width < grid.x_min or center + 0.5 * width > grid.x_max:
        raise InvariantViolation(
            f"slit [{center - 0.5 * width}, {center + 0.5 * width}] outside grid domain "
            f"[{grid.x_min}, {grid.x_max}]"
        )
    return np.abs(grid.x - center) <= 0.5 * width


def apply_slit(psi: WaveFunction, center: float, width: float) -> SlitOutcome:
    """Lueders two-outcome measurement: does the particle pass the slit?

    Branch amplitudes are the masked/complement amplitudes renormalized;
    branch probabilities are the pre-normalization norms squared and sum to 1
    exactly.  A branch with (near-)zero probability is flagged by returning
    no state for it rather than renormalizing noise.
    """
    g = psi.grid
    mask = slit_mask(g, center, width)
    branches: list[tuple[WaveFunction | None, float]] = []
    for sel in (mask, ~mask):
        amp = np.where(sel, psi.amplitudes, 0.0)
        prob = float(np.sum(np.abs(amp) ** 2) * g.dx)
        if prob < ZERO_BRANCH_TOL:
            branches.append((None, prob))
        else:
            branches.append((WaveFunction(g, amp / np.sqrt(prob), "position"), prob))
    (ps, pp), (fs, fp) = branches
    return SlitOutcome(ps, pp, fs, fp)


def embed_joint(psi: WaveFunction, probe: ProbeSpec) -> JointState:
    """Product state psi (x) ready."""
    return JointState(psi.grid, probe.grid, np.outer(psi.amplitudes, probe.ready_state.amplitudes))


def apply_von_neumann(joint: JointState, g: float, direction: str = "forward") -> JointState:
    """Apply U = exp(-i g X_s P_p / hbar) (or its adjoint) exactly.

    Each system column's probe wave function is translated by +g*x_i
    (forward) or -g*x_i (adjoint) via momentum-space phase multiplication.
    Raises ConfinementError when the translated probe carries significant
    probability at the probe-grid edge.
    """
    if direction not in ("forward", "adjoint"):
        raise ValueError(f"direction must be 'forward' or 'adjoint', got {direction!r}")
    sg, pg = joint.system_grid, joint.probe_grid
    sgn = 1.0 if direction == "forward" else -1.0
    phases = np.exp(-1j * sgn * g * np.outer(sg.x, pg.p) / pg.hbar)
    mom = kernel_transform(joint.amplitudes, 1, pg.x[0], pg.dx, pg.p[0], pg.dp, pg.hbar, -1)
    out = kernel_transform(mom * phases, 1, pg.p[0], pg.dp, pg.x[0], pg.dx, pg.hbar, +1)
    result = JointState(sg, pg, out)
    # confinement is a state invariant: operator images (unnormalized
    # intermediates inside RMS sandwiches) are exempt from the edge check
    total = float(np.sum(np.abs(out) ** 2) * result.measure)
    if abs(total - 1.0) < 1e-6:
        edge = np.concatenate((result.amplitudes[:, :2], result.amplitudes[:, -2:]), axis=1)
        edge_mass = float(np.sum(np.abs(edge) ** 2) * result.measure)
        if edge_mass > CONFINEMENT_TOL:
            raise ConfinementError(
                f"probe confinement violated after shift: edge mass {edge_mass:.3e} "
                f"(probe domain [{pg.x_min}, {pg.x_max}], gain {g})"
            )
    return result


def translated_pointer_table(channel: VonNeumannChannel, system_grid: GridSpec) -> np.ndarray:
    """ready(y - g*x_i) for every system point: table of shape (n_s, n_p).

    Periodic translation through momentum phases, so each row keeps exactly
    unit norm; this is the ingredient of the pointer-basis Kraus family.
    """
    pg = channel.probe.grid
    ready = channel.probe.ready_state.amplitudes
    phi = kernel_transform(ready, 0, pg.x[0], pg.dx, pg.p[0], pg.dp, pg.hbar, -1)
    phases = np.exp(-1j * channel.g * np.outer(system_grid.x, pg.p) / pg.hbar)
    return kernel_transform(phi[None, :] * phases, 1, pg.p[0], pg.dp, pg.x[0], pg.dx, pg.hbar, +1)


KrausOperator = Callable[[np.ndarray], np.ndarray]


def kraus_of(channel: Channel, grid: GridSpec) -> list[KrausOperator]:
    """Kraus family of a channel, as functions acting on amplitude arrays.

    flip -> a single unitary; slit -> the projector pair; von_neumann -> one
    operator per probe pointer-basis point, K_j = sqrt(dy_p) <y_j| U |. , ready>.
    """
    if isinstance(channel, FlipChannel):
        return [lambda a: a[::-1].copy()]
    if isinstance(channel, SlitChannel):
        mask = slit_mask(grid, channel.center, channel.width)
        inv = ~mask
        return [
            lambda a, m=mask: np.where(m, a, 0.0),
            lambda a, m=inv: np.where(m, a, 0.0),
        ]
    if isinstance(channel, VonNeumannChannel):
        table = translated_pointer_table(channel, grid)
        root = np.sqrt(channel.probe.grid.dx)

        def make(j: int) -> KrausOperator:
            col = root * table[:, j]
            return lambda a, c=col: c * a

        return [make(j) for j in range(channel.probe.grid.n_points)]
    raise TypeError(f"unknown channel {channel!r}")


@dataclass(frozen=True)
class DensityOperator:
    """Position-kernel density matrix: trace = sum_i rho[i,i] * dx = 1."""

    grid: GridSpec
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.grid.n_points
        if m.shape != (n, n):
            raise ValueError(f"density matrix shape {m.shape}, expected ({n}, {n})")
        tr = float(np.real(np.trace(m)) * self.grid.dx)
        if abs(tr - 1.0) > 1e-8:
            raise InvariantViolation(f"density trace {tr!r} deviates from 1")
        herm = float(np.max(np.abs(m - m.conj().T)))
        if herm > 1e-10 * max(1.0, float(np.max(np.abs(m)))):
            raise InvariantViolation(f"density operator not Hermitian: deviation {herm:.3e}")
        object.__setattr__(self, "matrix", m)

    def eigenvalues(self) -> np.ndarray:
        """Occupation probabilities (eigenvalues of the dimensionless matrix)."""
        vals = np.linalg.eigvalsh(self.matrix * self.grid.dx)
        if vals.min() < -1e-8:
            raise InvariantViolation(f"negative eigenvalue {vals.min():.3e}")
        return vals[::-1]

    def purity(self) -> float:
        return float(np.sum(self.eigenvalues() ** 2))


def reduce_system(joint: JointState) -> DensityOperator:
    """Partial trace over the probe."""
    a = joint.amplitudes
    rho = (a @ a.conj().T) * joint.probe_grid.dx
    return DensityOperator(joint.system_grid, rho)


def pure_density(psi: WaveFunction) -> DensityOperator:
    return DensityOperator(psi.grid, np.outer(psi.amplitudes, psi.amplitudes.conj()))


def density_from_kraus(channel: Channel, psi: WaveFunction) -> DensityOperator:
    """Nonselective output state sum_m K_m |psi><psi| K_m^dag."""
    n = psi.grid.n_points
    rho = np.zeros((n, n), dtype=complex)
    for k in kraus_of(channel, psi.grid):
        branch = k(psi.amplitudes)
        rho += np.outer(branch, branch.conj())
    return DensityOperator(psi.grid, rho)


def position_distribution_of(rho: DensityOperator) -> ProbabilityDistribution:
    g = rho.grid
    return ProbabilityDistribution(g.x, np.real(np.diag(rho.matrix)), g.dx)


def momentum_distribution_of(rho: DensityOperator) -> ProbabilityDistribution:
    """Diagonal of F rho F^dag on the momentum grid."""
    g = rho.grid
    cols = kernel_transform(rho.matrix, 0, g.x[0], g.dx, g.p[0], g.dp, g.hbar, -1)
    full = kernel_transform(cols.conj(), 1, g.x[0], g.dx, g.p[0], g.dp, g.hbar, -1).conj()
    return ProbabilityDistribution(g.p, np.real(np.diag(full)), g.dp)


def trace_distance(a: DensityOperator, b: DensityOperator) -> float:
    diff = (a.matrix - b.matrix) * a.grid.dx
    vals = np.linalg.eigvalsh(diff)
    return 0.5 * float(np.sum(np.abs(vals)))


def density_spectrum_to_csv(rho: DensityOperator, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "eigenvalue"])
        for i, v in enumerate(rho.eigenvalues()):
            w.writerow([i, f"{v:.12g}"])
