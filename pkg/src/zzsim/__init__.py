"""Two-qubit weak ZZ parity measurement with local Hamiltonian feedback.

Trajectory-level simulation of the stochastic master equation for a
continuously monitored two-qubit parity, the rapid subspace-purification
and rapid-entanglement feedback protocols built on its decoherence-free
subspaces, and reproducible Monte-Carlo ensembles with CSV output.
"""

from .config import ConfigError, ExperimentConfig, PRESETS, parse_config, preset_config, serialize
from .ensemble import (
    EnsembleError,
    EnsembleStats,
    TimeSeries,
    aggregate,
    run_ensemble,
    run_ensemble_raw,
    run_trajectory,
    welch_compare,
)
from .metrics import (
    MetricsRow,
    bell_fidelity,
    concurrence,
    dfs_weights,
    encoded_purity,
    metrics_row,
    purity,
    purity_increment,
    r2_squared,
)
from .pauli import (
    ControlAction,
    EncodedBloch,
    LABELS,
    MATRICES,
    Rotation,
    SignedPauliProduct,
    apply_local_rotation,
    check_density_matrix,
    commutes_with,
    encoded_bloch,
    hadamard_frame_toggle,
    pauli_expand,
    pauli_product,
    pauli_reconstruct,
)
from .policies import PolicyStep, StageSchedule, policy_step, stage1_angle, stage1_finalize, stage2_angle
from .sme import (
    MeasurementModel,
    NoiseStream,
    TrajectoryAbort,
    TrajectoryState,
    drift_term,
    em_step,
    innovation_term,
    kraus_step,
    record_increment,
    sanitize,
)

__version__ = "0.1.0"
