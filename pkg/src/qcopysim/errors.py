"""Exception types shared across the simulator."""

from __future__ import annotations


class SimulationError(Exception):
    """Base class for all domain errors raised by this package."""


class ZeroNormError(SimulationError, ValueError):
    """Amplitude list with zero norm cannot describe a state."""


class TargetNotReadyError(SimulationError):
    """Copy target is not in its ready (blank-medium) basis state."""


class EscapedSubsystemError(SimulationError):
    """A copy record involves a subsystem that escaped; it cannot be undone."""


class NonSuffixErasureError(SimulationError):
    """Requested records are not the latest operations on their subsystems."""


class AllZeroProbabilitiesError(SimulationError):
    """State has no support on the requested measurement basis."""


class DegenerateSourceError(SimulationError):
    """A source symbol has zero marginal probability; its channel row is undefined."""


class InconsistentKnowledgeError(SimulationError):
    """Observer records condition the global state onto a zero-probability branch."""


class ScenarioParseError(SimulationError):
    """Scenario text rejected; carries the offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message
