"""Coherence quantifiers built on the Tsallis relative alpha-entropy."""

from .channels import (
    KrausSet,
    apply_channel,
    is_incoherent_kraus,
    l2_generalized_monotonicity_report,
    lift_block_column,
    mixing_convexity_report,
    outcome_split_gap,
    outcome_split_sides,
    random_density,
    random_incoherent_kraus,
    random_unitary,
    selective_measure,
    strong_monotonicity_report,
)
from .coherence import (
    IncoherentState,
    ReferenceBasis,
    brute_force_coherence,
    closest_incoherent,
    coherence_2_quadratic,
    coherence_alpha,
    coherence_l1,
    coherence_l2,
    mixedness,
    purity_upper_bound,
    tradeoff_report,
)
from .config import Tolerances, get_tolerances, use_tolerances
from .divergence import (
    AlphaParam,
    DivergenceValue,
    alpha_log,
    quantum_divergence_unnormalized,
    quantum_tsallis,
    tsallis_classical,
)
from .errors import (
    AlphaOutOfRange,
    BadRank,
    CoherenceLabError,
    DimensionMismatch,
    DimensionTooLarge,
    HeterogeneousOutputs,
    InfeasibleShape,
    InternalConsistencyError,
    InvalidState,
    LengthMismatch,
    NoConvergence,
    NonPositiveArgument,
    NotComplete,
    NotHermitian,
    NotIncoherentKraus,
    NotPSD,
    ParseError,
    SupportViolation,
)
from .linalg import DensityMatrix, eigh, matrix_power, purity, range_contained
from .qubit import (
    QubitState,
    figure_data,
    qubit_c1,
    qubit_c2,
    qubit_eigenvalues,
    qubit_max_coherence,
    qubit_tradeoff_report,
)

__version__ = "0.1.0"
