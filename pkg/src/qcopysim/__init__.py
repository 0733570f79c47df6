"""Desk-scale simulator for information copying in quantum systems.

Builds copy unitaries between labeled subsystems, runs projective
measurements and observer-relative reductions, erases copies while they are
still reachable, and reports classical and quantum information metrics, all
driven by a small line-oriented scenario language.
"""

from .copier import (
    CHAINED,
    FROM_SOURCE,
    CopierSpec,
    CopyRecord,
    apply_copy,
    build_copier,
    erase_copies,
    multi_copy,
)
from .errors import (
    AllZeroProbabilitiesError,
    DegenerateSourceError,
    EscapedSubsystemError,
    InconsistentKnowledgeError,
    NonSuffixErasureError,
    ScenarioParseError,
    SimulationError,
    TargetNotReadyError,
    ZeroNormError,
)
from .infometrics import (
    Distribution,
    NGramModel,
    build_ngram,
    observer_surprisal,
    quantum_mutual_information,
    shannon_entropy,
    transinformation,
    von_neumann_entropy,
)
from .measurement import (
    SYMBOL,
    MeasurementOutcome,
    ReadoutChannel,
    measure,
    outcome_probabilities,
    premeasure,
    readout_channel,
)
from .perspective import Observer, perspective_state, perspectives_consistent
from .qstate import (
    DensityMatrix,
    StateVector,
    Subsystem,
    SubsystemLayout,
    UnitaryOp,
    apply_unitary,
    fidelity,
    make_state,
    partial_trace,
)
from .scenario import (
    FIXED_EVENT,
    REVOCABLE,
    MetricRequest,
    RunReport,
    Scenario,
    Step,
    event_status,
    load_preset,
    parse_scenario,
    preset_names,
    run_scenario,
)

__all__ = [
    "AllZeroProbabilitiesError",
    "CHAINED",
    "CopierSpec",
    "CopyRecord",
    "DegenerateSourceError",
    "DensityMatrix",
    "Distribution",
    "EscapedSubsystemError",
    "FIXED_EVENT",
    "FROM_SOURCE",
    "InconsistentKnowledgeError",
    "MeasurementOutcome",
    "MetricRequest",
    "NGramModel",
    "NonSuffixErasureError",
    "Observer",
    "ReadoutChannel",
    "REVOCABLE",
    "RunReport",
    "Scenario",
    "ScenarioParseError",
    "SimulationError",
    "StateVector",
    "Step",
    "Subsystem",
    "SubsystemLayout",
    "SYMBOL",
    "TargetNotReadyError",
    "UnitaryOp",
    "ZeroNormError",
    "apply_copy",
    "apply_unitary",
    "build_copier",
    "build_ngram",
    "erase_copies",
    "event_status",
    "fidelity",
    "load_preset",
    "make_state",
    "measure",
    "multi_copy",
    "observer_surprisal",
    "outcome_probabilities",
    "parse_scenario",
    "partial_trace",
    "perspective_state",
    "perspectives_consistent",
    "premeasure",
    "preset_names",
    "quantum_mutual_information",
    "readout_channel",
    "run_scenario",
    "shannon_entropy",
    "transinformation",
    "von_neumann_entropy",
]

__version__ = "0.1.0"
