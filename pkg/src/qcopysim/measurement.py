"""Premeasurement, projective readout with Born-rule sampling, and
readout-channel extraction for wrong-basis analysis.

Readout in a rotated basis {cos(t/2)|0> + sin(t/2)|1>, -sin(t/2)|0> + cos(t/2)|1>}
models reading a copy with states other than the agreed symbol basis; the
resulting conditional-probability channel quantifies the information lost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .copier import CopierSpec, build_copier
from .errors import AllZeroProbabilitiesError, DegenerateSourceError, TargetNotReadyError
from .qstate import ATOL, StateVector, apply_unitary

SYMBOL = "symbol"

_PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class MeasurementOutcome:
    """One projective readout: which basis, which result, and the branch kept."""

    label: str
    basis: str
    result: int
    probability: float
    post_state: StateVector

    def __post_init__(self):
        if not self.probability > 0:
            raise ValueError("outcome probability must be positive")


@dataclass(frozen=True)
class ReadoutChannel:
    """Row-stochastic matrix: entry (i, k) = P(readout k | source symbol i)."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"channel matrix must be square, got {m.shape}")
        if (m < -ATOL).any() or (m > 1 + ATOL).any():
            raise ValueError("channel entries must lie in [0, 1]")
        if np.abs(m.sum(axis=1) - 1.0).max() > ATOL:
            raise ValueError("channel rows must sum to 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def joint_with_uniform_source(self) -> np.ndarray:
        """Joint P(x, y) when the source symbol is uniformly distributed."""
        return self.matrix / self.matrix.shape[0]


def _basis_columns(basis: str | float, dim: int) -> tuple[np.ndarray, str]:
    """Measurement basis as columns, plus its printable descriptor."""
    if isinstance(basis, str):
        if basis != SYMBOL:
            raise ValueError(f"unknown basis {basis!r}; use 'symbol' or a rotation angle")
        return np.eye(dim, dtype=np.complex128), SYMBOL
    theta = float(basis)
    if dim != 2:
        raise ValueError("rotated bases are defined for 2-level subsystems only")
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    cols = np.array([[c, -s], [s, c]], dtype=np.complex128)
    return cols, f"theta={theta:.9g}"


def _axis_first(state: StateVector, label: str) -> np.ndarray:
    pos = state.layout.position(label)
    return np.moveaxis(state.tensor(), pos, 0).reshape(state.layout.dim_of(label), -1)


def outcome_probabilities(
    state: StateVector, label: str, basis: str | float = SYMBOL
) -> np.ndarray:
    """Exact Born probabilities for measuring ``label`` in the given basis."""
    cols, _ = _basis_columns(basis, state.layout.dim_of(label))
    m = _axis_first(state, label)
    return (np.abs(cols.conj().T @ m) ** 2).sum(axis=1)


def _project(state: StateVector, label: str, cols: np.ndarray, k: int) -> tuple[float, StateVector]:
    """Probability of outcome k and the renormalized projected branch.

    On zero probability the input state is returned unchanged; callers must
    check the probability before trusting the branch.
    """
    layout = state.layout
    pos = layout.position(label)
    dim = layout.dim_of(label)
    psi = np.moveaxis(state.tensor(), pos, 0).reshape(dim, -1)
    rest = cols[:, k].conj() @ psi
    p = float(np.vdot(rest, rest).real)
    if p <= 0.0:
        return 0.0, state
    branch = np.outer(cols[:, k], rest / math.sqrt(p))
    shape = list(layout.dims)
    shape.insert(0, shape.pop(pos))
    branch = np.moveaxis(branch.reshape(shape), 0, pos)
    return p, StateVector(layout, branch.reshape(-1))


def premeasure(state: StateVector, system: str, apparatus: str) -> StateVector:
    """Entangle an apparatus with the system, copying the symbol it will show.

    The apparatus must start in its first basis state (the ready state); the
    transition is exactly the copy unitary with the default recipe.
    """
    if state.layout.dim_of(system) != state.layout.dim_of(apparatus):
        raise ValueError("system and apparatus dimensions must match")
    weights = np.sum(np.abs(_axis_first(state, apparatus)) ** 2, axis=1)
    if 1.0 - weights[0] > ATOL:
        raise TargetNotReadyError(f"apparatus {apparatus!r} is not in its ready state")
    spec = CopierSpec(source=system, target=apparatus)
    return apply_unitary(state, build_copier(spec, state.layout))


def measure(
    state: StateVector,
    label: str,
    basis: str | float = SYMBOL,
    rng: int | np.random.Generator = 0,
) -> MeasurementOutcome:
    """Sample one outcome with Born probabilities and keep that branch.

    ``rng`` is an integer seed or a numpy Generator threaded by the caller;
    one uniform draw is consumed per call, so identical seeds give identical
    outcome sequences.
    """
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(int(rng))
    layout = state.layout
    pos = layout.position(label)
    dim = layout.dims[pos]
    symbol_readout = isinstance(basis, str)
    if symbol_readout:
        if basis != SYMBOL:
            raise ValueError(f"unknown basis {basis!r}; use 'symbol' or a rotation angle")
        descriptor = SYMBOL
    else:
        cols, descriptor = _basis_columns(basis, dim)

    moved = np.moveaxis(state.tensor(), pos, 0).reshape(dim, -1)
    rows = moved if symbol_readout else cols.conj().T @ moved
    probs = (np.abs(rows) ** 2).sum(axis=1)
    if probs.max() < _PROB_FLOOR:
        raise AllZeroProbabilitiesError(
            f"state has no support on the requested basis for {label!r}"
        )
    u = gen.random()
    cumulative = 0.0
    result = 0
    for k, p in enumerate(probs):
        if p <= 0.0:
            continue
        result = k  # rounding may leave cumulative just under 1; keep last viable
        cumulative += p
        if u < cumulative:
            break

    p = float(probs[result])
    if symbol_readout:
        branch = np.zeros_like(moved)
        branch[result] = moved[result] / math.sqrt(p)
    else:
        branch = np.outer(cols[:, result], rows[result] / math.sqrt(p))
    shape = [dim] + [d for i, d in enumerate(layout.dims) if i != pos]
    amps = np.moveaxis(branch.reshape(shape), 0, pos).reshape(-1)
    post = StateVector(layout, amps)
    return MeasurementOutcome(
        label=label, basis=descriptor, result=result, probability=p, post_state=post
    )


def readout_channel(
    joint: StateVector,
    source: str,
    copy: str,
    copy_basis: float,
) -> ReadoutChannel:
    """Exact conditional distribution of rotated-basis readouts per source symbol.

    No sampling: each source symbol is projected out in the symbol basis and
    the copy's rotated-basis probabilities are computed on that branch.
    """
    d = joint.layout.dim_of(source)
    if joint.layout.dim_of(copy) != d:
        raise ValueError("source and copy dimensions must match")
    sym_cols, _ = _basis_columns(SYMBOL, d)
    matrix = np.zeros((d, d))
    for i in range(d):
        p_i, branch = _project(joint, source, sym_cols, i)
        if p_i < _PROB_FLOOR:
            raise DegenerateSourceError(
                f"source symbol {i} of {source!r} has zero probability"
            )
        matrix[i] = outcome_probabilities(branch, copy, copy_basis)
    return ReadoutChannel(matrix)
