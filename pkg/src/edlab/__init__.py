"""Numerical laboratory contrasting state-specific RMS measurement
error/disturbance with worst-case distribution-distance figures on
discretized 1D systems."""

from .channels import (
    Channel,
    ConfinementError,
    DensityOperator,
    FlipChannel,
    JointState,
    ProbeSpec,
    SlitChannel,
    SlitOutcome,
    VonNeumannChannel,
    apply_flip,
    apply_slit,
    apply_von_neumann,
    density_from_kraus,
    embed_joint,
    kraus_of,
    make_probe,
    momentum_distribution_of,
    position_distribution_of,
    probe_grid_for,
    reduce_system,
    trace_distance,
)
from .grids import (
    GridSpec,
    InvariantViolation,
    Moments,
    ProbabilityDistribution,
    WaveFunction,
    distribution,
    make_grid,
    moments,
    to_momentum,
    to_position,
)
from .metrics import (
    EDRReport,
    RelationReport,
    busch_state_disturbance,
    busch_state_error,
    compute_report,
    evaluate_relations,
    lund_wiseman_eta,
    ozawa_disturbance,
    ozawa_error,
    wasserstein2,
)
from .states import (
    BumpState,
    GaussianState,
    RandomState,
    StateSpec,
    SymmetricPairState,
    is_symmetric,
    make_state,
)
from .supsearch import Eq2Report, SearchSpec, SupResult, eq2_check, maximize

__all__ = [name for name in dir() if not name.startswith("_")]
