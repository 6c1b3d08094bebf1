"""qiopa: photon statistics, Monte Carlo detection, and fringe analysis
for high-gain optical parametric amplification of a single injected
polarization qubit."""

__version__ = "0.1.0"

from .fock import (
    DEFAULT_MAX_INDEX,
    DEFAULT_TAIL_EPS,
    DistributionKind,
    GainParams,
    JointDistribution,
    MarginalDistribution,
    PhotonPair,
    joint_distribution,
    log_amplitude_phi_plus,
    make_gain_params,
    marginal_distribution,
    parity_eigenvalue,
)
from .model import (
    BranchWeights,
    FringePrediction,
    branch_weights,
    clone_number,
    estimate_p,
    mean_fringe,
    visibility_effective,
    visibility_ideal,
    visibility_no_coherence,
)
from .detection import (
    Branch,
    DetectionConfig,
    ExperimentConfig,
    SamplingTables,
    Shot,
    ShotBatch,
    apply_loss,
    form_signals,
    point_stream,
    run_experiment,
    sample_shot_batch,
    sample_true_counts,
)
from .analysis import (
    DiscriminationResult,
    FilterConfig,
    FilterCurvePoint,
    FringeFit,
    FringeScanResult,
    discriminate,
    fidelity_verdict,
    filtered_visibility_curve,
    fit_fringe,
    fit_visibility_log_curve,
    o_filter,
    parity_discriminate,
    scan_fringe,
)
from .errors import (
    ConfigError,
    CutoffError,
    FitError,
    InsufficientDataError,
    QiopaError,
    TruncationError,
)

__all__ = [name for name in dir() if not name.startswith("_")]
