"""Observer-relative state assignment.

An observer's description of a subsystem set is the global state conditioned
on the records that observer holds, reduced to the subsystems asked about.
Observers holding no records see the unreduced (generally mixed) marginal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import InconsistentKnowledgeError
from .qstate import DensityMatrix, StateVector, partial_trace

_SUPPORT_TOL = 1e-10
_ZERO_PROB = 1e-12


@dataclass(frozen=True)
class Observer:
    """A named holder of records: which subsystems, and which outcomes read."""

    name: str
    known_labels: frozenset[str] = frozenset()
    known_outcomes: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "known_labels", frozenset(self.known_labels))
        outcomes = dict(self.known_outcomes)
        object.__setattr__(self, "known_outcomes", outcomes)
        stray = set(outcomes) - self.known_labels
        if stray:
            raise ValueError(
                f"observer {self.name!r} has outcomes for unheld records {sorted(stray)}"
            )


def _condition(global_state: StateVector, outcomes: Mapping[str, int]) -> StateVector:
    """Project onto the observer's read outcomes (symbol basis) and renormalize."""
    if not outcomes:
        return global_state
    layout = global_state.layout
    psi = global_state.tensor().copy()
    for label, k in outcomes.items():
        pos = layout.position(label)
        dim = layout.dim_of(label)
        if not 0 <= k < dim:
            raise ValueError(f"outcome {k} out of range for {label!r} (dim {dim})")
        moved = np.moveaxis(psi, pos, 0)
        mask = np.zeros(dim)
        mask[k] = 1.0
        moved *= mask.reshape((dim,) + (1,) * (moved.ndim - 1))
    norm_sq = float(np.vdot(psi, psi).real)
    if norm_sq < _ZERO_PROB:
        raise InconsistentKnowledgeError(
            f"records {dict(outcomes)} select a zero-probability branch"
        )
    return StateVector(layout, psi.reshape(-1) / math.sqrt(norm_sq))


def perspective_state(
    global_state: StateVector, obs: Observer, about: Iterable[str]
) -> DensityMatrix:
    """The density matrix ``obs`` assigns to the subsystems in ``about``."""
    conditioned = _condition(global_state, obs.known_outcomes)
    return partial_trace(conditioned, about)


def perspectives_consistent(
    global_state: StateVector, obs_list: Iterable[Observer], about: str
) -> bool:
    """True when all observers leave a common possible outcome for ``about``.

    Each observer's conditioned marginal gives a support set of outcomes; the
    descriptions agree iff those supports intersect. An observer whose records
    already contradict the global state makes the collection inconsistent.
    """
    common: set[int] | None = None
    for obs in obs_list:
        try:
            rho = perspective_state(global_state, obs, {about})
        except InconsistentKnowledgeError:
            return False
        support = {k for k, p in enumerate(np.diag(rho.elems).real) if p > _SUPPORT_TOL}
        common = support if common is None else common & support
        if not common:
            return False
    return True
