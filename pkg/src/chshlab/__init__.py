"""Classical joint-distribution model vs. two-photon amplitude calculus for CHSH."""

from .analysis import (
    FeasibilityResult,
    MalformedTargets,
    cascade_joint,
    discrepancy,
    kolmogorov_vs_quantum_or,
    marginal_match_feasibility,
)
from .classical import (
    MINUS,
    PLUS,
    QUADRUPLES,
    SETTINGS,
    JointDistribution16,
    OutcomeQuadruple,
    OutcomeSign,
    PairDistribution,
    SettingPair,
    chsh,
    correlator,
    deterministic_joint,
    joint_from_weights,
    kolmogorov_or,
    max_chsh_deterministic,
    pair_marginal,
    random_joint,
)
from .montecarlo import Model, estimate_chsh, estimate_correlator, sample_cascade, sample_pair_quantum
from .quantum import (
    TSIRELSON,
    DirectionConfig,
    amplitude_or,
    branch_amplitudes,
    chsh_quantum,
    correlation_quantum,
    optimize_chsh,
    pair_probability,
    pair_probability_closed,
    rotate_photon_basis,
    singlet_ket,
)

__version__ = "0.1.0"
