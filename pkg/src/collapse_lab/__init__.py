"""Sequential projective measurements, their classical analog, and coherence
certification through violations of the laws of total probability and variance."""

__version__ = "0.1.0"

from .classical import (
    ClassicalSystem,
    classical_cmo_check,
    conditional_probability,
    total_probability_check,
    total_variance_check,
)
from .coherence import (
    CoherenceReport,
    QubitParams,
    coherence_report,
    is_incoherent,
    qubit_oracle,
    qubit_state,
    qubit_x,
    qubit_y,
    trace_distance_to_dephased,
    variance_gap,
    variational_trace_distance,
    witness_observable,
)
from .linalg import SpectralDecomposition, eigh, trace_norm, unitary_exp
from .protocols import (
    MeasurementRecord,
    MeasurementStep,
    cmo_limit_probe,
    conditional_second_distribution,
    direct_distribution,
    post_measurement_distribution,
    sample_records,
    total_probability_residual,
)
from .quantum import (
    DensityMatrix,
    Observable,
    OutcomeDistribution,
    born_distribution,
    collapse,
    dephase,
    evolve,
    verify_cmo_implies_collapse,
)
