"""Error/disturbance functionals and the inequalities that relate them.

Two families of figures for the same (state, channel) pair:

* RMS noise-operator quantities: the disturbance eta = <(U^dag B U - B)^2>^(1/2)
  evaluated on the dilated state, and the measurement error
  eps = <(U^dag (X_p/g) U - X_s)^2>^(1/2) for a pointer coupling.  These are
  properties of the state actually measured.
* Distribution-distance quantities: Wasserstein-2 distances between the
  observable's probability distribution before and after the channel
  (disturbance), or between the calibrated pointer readout distribution and
  the ideal one (error).  Maximized over state families elsewhere, these
  quantify the device's worst case rather than the state at hand.

A weak-valued estimator of the RMS disturbance is included: it rebuilds
eta from the joint quasiprobability of a weak observable reading before the
channel and a strong one after, and agrees with the noise-operator value
identically when the bins are the native grid points.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .channels import (
    Channel,
    FlipChannel,
    JointState,
    SlitChannel,
    VonNeumannChannel,
    apply_flip,
    apply_von_neumann,
    embed_joint,
    kraus_of,
    momentum_distribution_of,
    reduce_system,
)
from .grids import (
    ProbabilityDistribution,
    WaveFunction,
    apply_momentum_operator,
    apply_position_operator,
    distribution,
    kernel_transform,
    moments,
)

logger = logging.getLogger(__name__)

ObservableName = str  # "X" or "P"


# ---------------------------------------------------------------------------
# Wasserstein-2 by exact 1D quantile coupling
# ---------------------------------------------------------------------------

def wasserstein2(d1: ProbabilityDistribution, d2: ProbabilityDistribution) -> float:
    """W2 distance between two atomic distributions.

    In 1D the optimal coupling pairs equal quantile levels, so W2^2 is the
    integral over u in (0,1] of (F^-1(u) - G^-1(u))^2.  Both quantile
    functions are step functions; we merge their jump levels and sum exactly.
    """
    x, wx = d1.support, d1.weights * d1.spacing
    y, wy = d2.support, d2.weights * d2.spacing
    kx = wx > 0
    ky = wy > 0
    x, wx = x[kx], wx[kx]
    y, wy = y[ky], wy[ky]
    cx = np.cumsum(wx)
    cy = np.cumsum(wy)
    cx /= cx[-1]
    cy /= cy[-1]
    levels = np.union1d(cx, cy)
    ix = np.minimum(np.searchsorted(cx, levels - 1e-15), len(x) - 1)
    iy = np.minimum(np.searchsorted(cy, levels - 1e-15), len(y) - 1)
    du = np.diff(np.concatenate(([0.0], levels)))
    return float(np.sqrt(np.sum(du * (x[ix] - y[iy]) ** 2)))


# ---------------------------------------------------------------------------
# Observable application helpers
# ---------------------------------------------------------------------------

def _apply_observable(psi: WaveFunction, observable: ObservableName) -> np.ndarray:
    if observable == "X":
        return apply_position_operator(psi)
    if observable == "P":
        return apply_momentum_operator(psi)
    raise ValueError(f"observable must be 'X' or 'P', got {observable!r}")


def _apply_observable_joint(joint: JointState, observable: ObservableName) -> JointState:
    """B_s (x) 1 applied to a joint state, spectrally for P."""
    sg = joint.system_grid
    if observable == "X":
        out = sg.x[:, None] * joint.amplitudes
    elif observable == "P":
        mom = kernel_transform(joint.amplitudes, 0, sg.x[0], sg.dx, sg.p[0], sg.dp, sg.hbar, -1)
        out = kernel_transform(sg.p[:, None] * mom, 0, sg.p[0], sg.dp, sg.x[0], sg.dx, sg.hbar, +1)
    else:
        raise ValueError(f"observable must be 'X' or 'P', got {observable!r}")
    return JointState(sg, joint.probe_grid, out)


def _joint_norm(amplitudes: np.ndarray, joint: JointState) -> float:
    return float(np.sqrt(np.sum(np.abs(amplitudes) ** 2) * joint.measure))


# ---------------------------------------------------------------------------
# RMS (noise-operator) error and disturbance
# ---------------------------------------------------------------------------

def ozawa_error(channel: VonNeumannChannel, psi: WaveFunction) -> float:
    """RMS difference between the calibrated pointer reading and X_system.

    || (U^dag M U - X_s) |psi, ready> || with M = X_probe / g: apply U,
    multiply by the pointer coordinate over the gain, apply U^dag, subtract
    X_s on the input, take the joint norm.
    """
    if not isinstance(channel, VonNeumannChannel):
        raise TypeError("the RMS measurement error requires a probe coupling")
    joint = embed_joint(psi, channel.probe)
    coupled = apply_von_neumann(joint, channel.g, "forward")
    read = coupled.amplitudes * (channel.probe.grid.x[None, :] / channel.g)
    back = apply_von_neumann(JointState(joint.system_grid, joint.probe_grid, read), channel.g, "adjoint")
    diff = back.amplitudes - joint.system_grid.x[:, None] * joint.amplitudes
    return _joint_norm(diff, joint)


def ozawa_disturbance(
    channel: Channel,
    psi: WaveFunction,
    observable: ObservableName,
    form: str = "auto",
) -> float:
    """RMS change of an observable through a channel: <(U^dag B U - B)^2>^(1/2).

    Unitary channels evaluate the operator difference directly.  Kraus
    channels use the dilation identity
    eta^2 = sum_m || B K_m psi - K_m B psi ||^2, which is exact for any
    Stinespring dilation of the family.  The probe coupling defaults to the
    joint-unitary form; pass form="kraus" to cross-check one against the
    other.
    """
    if form not in ("auto", "joint", "kraus"):
        raise ValueError(f"form must be 'auto', 'joint' or 'kraus', got {form!r}")
    if isinstance(channel, FlipChannel):
        flipped = apply_flip(psi)
        pushed = apply_flip(WaveFunction(psi.grid, _apply_observable(flipped, observable), "position"))
        diff = pushed.amplitudes - _apply_observable(psi, observable)
        return float(np.sqrt(np.sum(np.abs(diff) ** 2) * psi.grid.dx))
    if isinstance(channel, SlitChannel) or (isinstance(channel, VonNeumannChannel) and form == "kraus"):
        b_psi = _apply_observable(psi, observable)
        total = 0.0
        for k in kraus_of(channel, psi.grid):
            branch = WaveFunction(psi.grid, k(psi.amplitudes), "position")
            diff = _apply_observable(branch, observable) - k(b_psi)
            total += float(np.sum(np.abs(diff) ** 2) * psi.grid.dx)
        return math.sqrt(total)
    if isinstance(channel, VonNeumannChannel):
        joint = embed_joint(psi, channel.probe)
        coupled = apply_von_neumann(joint, channel.g, "forward")
        pushed = apply_von_neumann(_apply_observable_joint(coupled, observable), channel.g, "adjoint")
        diff = pushed.amplitudes - _apply_observable_joint(joint, observable).amplitudes
        return _joint_norm(diff, joint)
    raise TypeError(f"unknown channel {channel!r}")


# ---------------------------------------------------------------------------
# Per-state distribution-distance (unmaximized worst-case-style) figures
# ---------------------------------------------------------------------------

def _post_channel_distribution(
    channel: Channel, psi: WaveFunction, observable: ObservableName
) -> ProbabilityDistribution:
    basis = "position" if observable == "X" else "momentum"
    if isinstance(channel, FlipChannel):
        return distribution(apply_flip(psi), basis)
    if isinstance(channel, SlitChannel):
        g = psi.grid
        acc = np.zeros(g.n_points)
        for k in kraus_of(channel, g):
            branch = WaveFunction(g, k(psi.amplitudes), "position")
            rep = branch if basis == "position" else _momentum_rep(branch)
            acc = acc + np.abs(rep.amplitudes) ** 2
        support = g.x if basis == "position" else g.p
        spacing = g.dx if basis == "position" else g.dp
        return ProbabilityDistribution(support, acc, spacing)
    if isinstance(channel, VonNeumannChannel):
        coupled = apply_von_neumann(embed_joint(psi, channel.probe), channel.g, "forward")
        if observable == "X":
            g = psi.grid
            return ProbabilityDistribution(g.x, coupled.system_marginal(), g.dx)
        return momentum_distribution_of(reduce_system(coupled))
    raise TypeError(f"unknown channel {channel!r}")


def _momentum_rep(psi: WaveFunction) -> WaveFunction:
    g = psi.grid
    amp = kernel_transform(psi.amplitudes, 0, g.x[0], g.dx, g.p[0], g.dp, g.hbar, -1)
    return WaveFunction(g, amp, "momentum")


def busch_state_disturbance(
    channel: Channel, psi: WaveFunction, observable: ObservableName
) -> float:
    """W2 distance between the observable's distribution before and after.

    Uses the nonselective output state, so selective collapse that leaves
    the marginal distribution unchanged registers as zero disturbance even
    when the RMS figure does not: this is the definitional contrast the
    package exists to exhibit.
    """
    before = distribution(psi, "position" if observable == "X" else "momentum")
    after = _post_channel_distribution(channel, psi, observable)
    return wasserstein2(before, after)


def busch_state_error(channel: VonNeumannChannel, psi: WaveFunction) -> float:
    """W2 distance between the calibrated readout and the ideal position law.

    The readout distribution is the probe position marginal after the
    coupling, with the coordinate divided by the gain.
    """
    if not isinstance(channel, VonNeumannChannel):
        raise TypeError("the readout-distribution error requires a probe coupling")
    coupled = apply_von_neumann(embed_joint(psi, channel.probe), channel.g, "forward")
    pg = channel.probe.grid
    weights = coupled.probe_marginal()
    support = pg.x / channel.g
    scaled = weights * abs(channel.g)
    if channel.g < 0:
        support, scaled = support[::-1].copy(), scaled[::-1].copy()
    readout = ProbabilityDistribution(support, scaled, pg.dx / abs(channel.g))
    return wasserstein2(readout, distribution(psi, "position"))


# ---------------------------------------------------------------------------
# Weak-valued estimator of the RMS disturbance
# ---------------------------------------------------------------------------

def lund_wiseman_eta(channel: Channel, psi: WaveFunction, observable: ObservableName) -> float:
    """Disturbance from the weak-valued joint distribution of (before, after).

    With one bin per grid point, sum_{j,k} (b_k - b_j)^2 *
    Re<Psi| Pi_j U^dag Pi_k U |Psi> reduces to second moments of the
    observable before and after plus one cross term; floating-point noise can
    drive the square slightly negative near zero disturbance, so the raw
    value is clamped at zero (and logged).
    """
    b_psi = _apply_observable(psi, observable)
    m_in = float(np.sum(np.abs(b_psi) ** 2) * psi.grid.dx)
    if isinstance(channel, FlipChannel):
        out = apply_flip(psi)
        b_out = _apply_observable(out, observable)
        m_out = float(np.sum(np.abs(b_out) ** 2) * psi.grid.dx)
        back = apply_flip(WaveFunction(psi.grid, b_out, "position"))
        cross = float(np.real(np.vdot(b_psi, back.amplitudes)) * psi.grid.dx)
    elif isinstance(channel, SlitChannel):
        m_out = 0.0
        cross = 0.0
        for k in kraus_of(channel, psi.grid):
            branch = WaveFunction(psi.grid, k(psi.amplitudes), "position")
            b_branch = _apply_observable(branch, observable)
            m_out += float(np.sum(np.abs(b_branch) ** 2) * psi.grid.dx)
            cross += float(np.real(np.vdot(k(b_psi), b_branch)) * psi.grid.dx)
    elif isinstance(channel, VonNeumannChannel):
        joint = embed_joint(psi, channel.probe)
        coupled = apply_von_neumann(joint, channel.g, "forward")
        b_coupled = _apply_observable_joint(coupled, observable)
        m_out = _joint_norm(b_coupled.amplitudes, joint) ** 2
        b_joint = _apply_observable_joint(joint, observable)
        forward_of_b = apply_von_neumann(b_joint, channel.g, "forward")
        cross = float(np.real(np.vdot(forward_of_b.amplitudes, b_coupled.amplitudes)) * joint.measure)
    else:
        raise TypeError(f"unknown channel {channel!r}")
    raw = m_out + m_in - 2.0 * cross
    if raw < 0.0:
        logger.debug("weak-valued eta^2 clamped to 0 (raw value %.3e)", raw)
    return math.sqrt(max(raw, 0.0))


# ---------------------------------------------------------------------------
# The inequalities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RelationReport:
    lhs_eq5: float
    product_eq2_form: float
    robertson_product: float
    rhs: float
    slack_eq5: float
    slack_eq2_form: float
    slack_robertson: float
    eq5_satisfied: bool
    eq2_form_satisfied: bool
    robertson_satisfied: bool
    applicable: bool


def evaluate_relations(
    epsilon: float, eta: float, delta_x: float, delta_p: float, hbar: float
) -> RelationReport:
    """Evaluate the three tradeoff relations for one (state, channel) pair.

    lhs_eq5 = eps*eta + eps*DeltaP + eta*DeltaX is compared against hbar/2,
    as are the bare product eps*eta and the spread product DeltaX*DeltaP.
    A channel with eps = eta = 0 conveys no position information at all, so
    the error-disturbance relations are reported as not applicable rather
    than violated ("not a position measurement").
    """
    for name, v in (("epsilon", epsilon), ("eta", eta), ("delta_x", delta_x), ("delta_p", delta_p)):
        if v < 0 or not np.isfinite(v):
            raise ValueError(f"{name} must be finite and nonnegative, got {v}")
    rhs = 0.5 * hbar
    lhs = epsilon * eta + epsilon * delta_p + eta * delta_x
    product = epsilon * eta
    robertson = delta_x * delta_p
    applicable = (epsilon > 0) or (eta > 0)
    return RelationReport(
        lhs_eq5=lhs,
        product_eq2_form=product,
        robertson_product=robertson,
        rhs=rhs,
        slack_eq5=lhs - rhs,
        slack_eq2_form=product - rhs,
        slack_robertson=robertson - rhs,
        eq5_satisfied=bool(lhs >= rhs * (1.0 - 1e-12)),
        eq2_form_satisfied=bool(product >= rhs * (1.0 - 1e-12)),
        robertson_satisfied=bool(robertson >= rhs * (1.0 - 1e-12)),
        applicable=applicable,
    )


# ---------------------------------------------------------------------------
# Full per-pair report
# ---------------------------------------------------------------------------

CSV_COLUMNS = [
    "epsilon_o",
    "eta_o_P",
    "eta_o_X",
    "delta_X",
    "delta_P",
    "w2_error_X",
    "w2_disturbance_P",
    "w2_disturbance_X",
    "lhs_eq5",
    "product_eq2_form",
    "robertson_product",
    "hbar_over_2",
    "robertson_satisfied",
    "eq2_form_satisfied",
    "eq5_applicable",
    "eq5_satisfied",
    "epsilon_convention",
]


@dataclass(frozen=True)
class EDRReport:
    """All computed figures for one (state, channel) pair."""

    epsilon_o: float
    eta_o_P: float
    eta_o_X: float
    delta_X: float
    delta_P: float
    w2_error_X: float
    w2_disturbance_P: float
    w2_disturbance_X: float
    lhs_eq5: float
    product_eq2_form: float
    robertson_product: float
    hbar_over_2: float
    robertson_satisfied: bool
    eq2_form_satisfied: bool
    eq5_applicable: bool
    eq5_satisfied: bool
    epsilon_convention: str  # "eq4" | "slit-width" | "none"

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in CSV_COLUMNS}


def compute_report(channel: Channel, psi: WaveFunction) -> EDRReport:
    """Assemble the full error/disturbance report for one pair.

    The flip has no readout, so no measurement error is defined (NaN, the
    tradeoff relations are not applicable).  The slit reports its width as a
    conventional error figure, labeled as such.  The probe coupling reports
    the RMS pointer error and both distribution-distance figures.
    """
    mom = moments(psi)
    hbar = psi.grid.hbar
    eta_p = ozawa_disturbance(channel, psi, "P")
    eta_x = ozawa_disturbance(channel, psi, "X")
    w2_p = busch_state_disturbance(channel, psi, "P")
    w2_x = busch_state_disturbance(channel, psi, "X")
    if isinstance(channel, VonNeumannChannel):
        eps = ozawa_error(channel, psi)
        convention = "eq4"
        w2_err = busch_state_error(channel, psi)
    elif isinstance(channel, SlitChannel):
        eps = channel.width
        convention = "slit-width"
        w2_err = float("nan")
    else:
        eps = float("nan")
        convention = "none"
        w2_err = float("nan")
    if np.isfinite(eps):
        rel = evaluate_relations(eps, eta_p, mom.delta_x, mom.delta_p, hbar)
        lhs, product = rel.lhs_eq5, rel.product_eq2_form
        applicable, satisfied = rel.applicable, rel.eq5_satisfied
        eq2_ok = rel.eq2_form_satisfied
        robertson_ok = rel.robertson_satisfied
        robertson = rel.robertson_product
    else:
        lhs = product = float("nan")
        applicable = satisfied = False
        robertson = mom.delta_x * mom.delta_p
        robertson_ok = bool(robertson >= 0.5 * hbar * (1.0 - 1e-12))
        eq2_ok = False
    return EDRReport(
        epsilon_o=eps,
        eta_o_P=eta_p,
        eta_o_X=eta_x,
        delta_X=mom.delta_x,
        delta_P=mom.delta_p,
        w2_error_X=w2_err,
        w2_disturbance_P=w2_p,
        w2_disturbance_X=w2_x,
        lhs_eq5=lhs,
        product_eq2_form=product,
        robertson_product=robertson,
        hbar_over_2=0.5 * hbar,
        robertson_satisfied=robertson_ok,
        eq2_form_satisfied=eq2_ok,
        eq5_applicable=applicable,
        eq5_satisfied=satisfied,
        epsilon_convention=convention,
    )
