"""Oracle sequential algorithms, approximation algorithms and the dependent-choice lift."""

from .approx import (
    UNIT,
    ApproxSpec,
    DecidablePredicate,
    InvalidApproximation,
    ValidationReport,
    check_answer_coherence,
    extract_witness,
    nci_realize,
    satisfies,
    validate_approx,
)
from .dclift import (
    MultiOracle,
    OmegaSpec,
    OmegaState,
    PaddedSequence,
    check_p_omega,
    in_F1_on_samples,
    lift,
    mind_change_bounds,
    run_omega,
)
from .engine import (
    FuelExhausted,
    MachineState,
    NonTermination,
    Oracle,
    OsaSpec,
    Stuck,
    Terminated,
    Trace,
    check_continuity,
    induced,
    mind_change_count,
    query_sequence,
    run,
    run_from,
    trace_to_json,
    trace_to_text,
)
from .values import EMPTY

__version__ = "0.1.0"
