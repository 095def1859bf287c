"""Stabilizer entropies, stabilizer protocols and convex-roof magic monotones."""
from .bounds import BoundReport, appendix_table, bound_report, prob_bound, rate_bound
from .entropy import (
    EntropyReport,
    NumericalDegeneracyError,
    closed_form_entropy,
    closed_form_purity,
    entropy_report,
    linear_stabilizer_entropy,
    stabilizer_entropies,
    stabilizer_entropy,
    stabilizer_nullity,
    stabilizer_purity,
)
from .pauli import (
    CharSpectrum,
    CliffordCircuit,
    DensityState,
    PauliLabel,
    PureState,
    ResourceError,
    apply_clifford,
    char_spectrum,
    cks_state,
    ckz_state,
    haar_state,
    make_named_state,
    naive_char_spectrum,
    pauli_expectation,
    random_clifford,
    t_state,
    zero_state,
)
from .protocol import (
    AppendZeroStep,
    CliffordStep,
    MeasureStep,
    ProtocolError,
    ProtocolProgram,
    RandomSplitStep,
    StateCollection,
    TraceOutStep,
    injection_program,
    is_deterministic_pure,
    random_protocol,
    run_protocol,
)
from .roof import (
    DecompositionCandidate,
    RoofOptions,
    RoofResult,
    collection_min_entropy,
    extended_entropy,
    extended_linear,
    extended_purity,
    roof_oracle_rank2,
)
from .verify import TrialReport, enumerate_stabilizer_states, run_suite, run_suites

__version__ = "0.1.0"
