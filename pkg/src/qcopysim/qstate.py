"""Dense tensor-product state kernel: layouts, state vectors, density matrices,
unitary application, projection and partial trace.

Index convention: a flat amplitude index is read as a mixed-radix number whose
most significant digit belongs to the first-listed subsystem. All values are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ZeroNormError

ATOL = 1e-10
PSD_FLOOR = -1e-10
MAX_TOTAL_DIM = 1 << 20  # dense desk-scale cap


def _default_basis(dim: int) -> tuple[str, ...]:
    return tuple(str(i) for i in range(dim))


@dataclass(frozen=True)
class Subsystem:
    """One labeled factor of the tensor product, with its symbol basis."""

    label: str
    dim: int
    symbol_basis: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbol_basis", tuple(self.symbol_basis))
        if self.dim < 2:
            raise ValueError(f"subsystem {self.label!r}: dim must be >= 2, got {self.dim}")
        if len(self.symbol_basis) != self.dim:
            raise ValueError(
                f"subsystem {self.label!r}: expected {self.dim} basis labels, "
                f"got {len(self.symbol_basis)}"
            )
        if len(set(self.symbol_basis)) != self.dim:
            raise ValueError(f"subsystem {self.label!r}: duplicate basis labels")


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered collection of labeled subsystems spanning the full space."""

    entries: tuple[Subsystem, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        labels = tuple(e.label for e in self.entries)
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate subsystem labels in {labels}")
        if not self.entries:
            raise ValueError("layout needs at least one subsystem")
        # cache derived lookups; positions are consulted in every hot path
        object.__setattr__(self, "_labels", labels)
        object.__setattr__(self, "_dims", tuple(e.dim for e in self.entries))
        object.__setattr__(self, "_total_dim", math.prod(self._dims))
        object.__setattr__(self, "_positions", {l: i for i, l in enumerate(labels)})
        if self._total_dim > MAX_TOTAL_DIM:
            raise ValueError(
                f"total dimension {self._total_dim} exceeds dense cap {MAX_TOTAL_DIM}"
            )

    @staticmethod
    def build(*specs: tuple) -> "SubsystemLayout":
        """Build a layout from (label, dim) or (label, dim, basis_labels) tuples."""
        entries = []
        for s in specs:
            if len(s) == 2:
                label, dim = s
                basis = _default_basis(dim)
            else:
                label, dim, basis = s
                basis = tuple(basis)
            entries.append(Subsystem(label, dim, basis))
        return SubsystemLayout(tuple(entries))

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def dims(self) -> tuple[int, ...]:
        return self._dims

    @property
    def total_dim(self) -> int:
        return self._total_dim

    def position(self, label: str) -> int:
        try:
            return self._positions[label]
        except KeyError:
            raise KeyError(f"unknown subsystem label {label!r}") from None

    def subsystem(self, label: str) -> Subsystem:
        return self.entries[self.position(label)]

    def dim_of(self, label: str) -> int:
        return self.subsystem(label).dim

    def basis_index(self, label: str, basis_label: str) -> int:
        sub = self.subsystem(label)
        try:
            return sub.symbol_basis.index(basis_label)
        except ValueError:
            raise KeyError(
                f"subsystem {label!r} has no basis label {basis_label!r} "
                f"(has {list(sub.symbol_basis)})"
            ) from None

    def subset(self, labels: Iterable[str]) -> "SubsystemLayout":
        """Sub-layout of the given labels, preserving this layout's order."""
        want = set(labels)
        missing = want - set(self.labels)
        if missing:
            raise KeyError(f"unknown subsystem labels {sorted(missing)}")
        return SubsystemLayout(tuple(e for e in self.entries if e.label in want))


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitudes over the layout's tensor-product space."""

    layout: SubsystemLayout
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amps, dtype=np.complex128)
        if amps.shape != (self.layout.total_dim,):
            raise ValueError(
                f"expected {self.layout.total_dim} amplitudes, got shape {amps.shape}"
            )
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > ATOL:
            raise ValueError(f"state not normalized: sum |a|^2 = {norm_sq!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per subsystem (read-only view)."""
        return self.amps.reshape(self.layout.dims)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite operator on a sub-layout."""

    layout: SubsystemLayout
    elems: np.ndarray = field(repr=False)

    def __post_init__(self):
        elems = np.ascontiguousarray(self.elems, dtype=np.complex128)
        d = self.layout.total_dim
        if elems.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got shape {elems.shape}")
        if np.abs(elems - elems.conj().T).max() > ATOL:
            raise ValueError("matrix is not Hermitian")
        tr = complex(np.trace(elems))
        if abs(tr - 1.0) > ATOL:
            raise ValueError(f"trace is {tr!r}, expected 1")
        if float(np.linalg.eigvalsh(elems).min()) < PSD_FLOOR:
            raise ValueError("matrix has a negative eigenvalue beyond tolerance")
        elems.setflags(write=False)
        object.__setattr__(self, "elems", elems)

    def purity(self) -> float:
        return float(np.trace(self.elems @ self.elems).real)


@dataclass(frozen=True)
class UnitaryOp:
    """Unitary acting on an ordered subset of subsystems.

    The matrix is indexed mixed-radix over ``target_labels`` in the given
    order (first label = most significant digit). Unitarity is checked on
    construction.
    """

    target_labels: tuple[str, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = tuple(self.target_labels)
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate target labels {labels}")
        object.__setattr__(self, "target_labels", labels)
        m = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"matrix must be square, got shape {m.shape}")
        err = np.abs(m.conj().T @ m - np.eye(m.shape[0])).max()
        if err > ATOL:
            raise ValueError(f"matrix is not unitary (max deviation {err:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def inverse(self) -> "UnitaryOp":
        return UnitaryOp(self.target_labels, self.matrix.conj().T)


def make_state(
    layout: SubsystemLayout,
    assignments: Mapping[str, str] | Iterable[tuple[str, str]] | None = None,
    amps: Sequence[complex] | np.ndarray | None = None,
) -> StateVector:
    """Create a state from per-subsystem basis assignments or a raw amplitude list.

    Exactly one of ``assignments``/``amps`` must be given. Assignments must
    cover every subsystem and yield a computational basis state; a raw
    amplitude list must have full length and is normalized.
    """
    if (assignments is None) == (amps is None):
        raise ValueError("provide exactly one of assignments or amps")
    if amps is not None:
        arr = np.asarray(amps, dtype=np.complex128)
        if arr.shape != (layout.total_dim,):
            raise ValueError(
                f"expected {layout.total_dim} amplitudes, got {arr.shape}"
            )
        norm = float(np.linalg.norm(arr))
        if norm < 1e-12:
            raise ZeroNormError("amplitude list has zero norm")
        return StateVector(layout, arr / norm)

    pairs = dict(assignments.items() if isinstance(assignments, Mapping) else assignments)
    extra = set(pairs) - set(layout.labels)
    if extra:
        raise KeyError(f"unknown subsystem labels {sorted(extra)}")
    missing = set(layout.labels) - set(pairs)
    if missing:
        raise ValueError(f"assignments missing subsystems {sorted(missing)}")
    index = 0
    for entry in layout.entries:
        index = index * entry.dim + layout.basis_index(entry.label, pairs[entry.label])
    vec = np.zeros(layout.total_dim, dtype=np.complex128)
    vec[index] = 1.0
    return StateVector(layout, vec)


def apply_unitary(state: StateVector, op: UnitaryOp) -> StateVector:
    """Apply ``op`` to its target subsystems, leaving the rest untouched."""
    layout = state.layout
    positions = [layout.position(l) for l in op.target_labels]
    block = math.prod(layout.dims[p] for p in positions)
    if op.matrix.shape[0] != block:
        raise ValueError(
            f"operator side {op.matrix.shape[0]} does not match target dimension {block}"
        )
    k = len(positions)
    psi = np.moveaxis(state.tensor(), positions, range(k))
    out = op.matrix @ psi.reshape(block, -1)
    out = np.moveaxis(out.reshape(psi.shape), range(k), positions)
    return StateVector(layout, out.reshape(-1))


def partial_trace(state: StateVector | DensityMatrix, keep: Iterable[str]) -> DensityMatrix:
    """Reduced density matrix over ``keep``, tracing out everything else.

    Kept subsystems appear in the original layout order.
    """
    keep_set = set(keep)
    if not keep_set:
        raise ValueError("keep set must be nonempty")
    sub = state.layout.subset(keep_set)

    if isinstance(state, StateVector):
        positions = [state.layout.position(l) for l in sub.labels]
        rest = [i for i in range(len(state.layout.entries)) if i not in positions]
        psi = np.transpose(state.tensor(), positions + rest)
        m = psi.reshape(sub.total_dim, -1)
        return DensityMatrix(sub, m @ m.conj().T)

    dims = state.layout.dims
    n = len(dims)
    tensor = state.elems.reshape(dims + dims)
    keep_pos = [state.layout.position(l) for l in sub.labels]
    row_sub = list(range(n))
    col_sub = [i if i not in keep_pos else n + i for i in range(n)]
    out_sub = keep_pos + [n + i for i in keep_pos]
    reduced = np.einsum(tensor, row_sub + col_sub, out_sub)
    d = sub.total_dim
    return DensityMatrix(sub, reduced.reshape(d, d))


def fidelity(a: StateVector, b: StateVector) -> float:
    """Squared overlap |<a|b>|^2; symmetric, 1 iff the states coincide."""
    if a.layout != b.layout:
        raise ValueError("states live on different layouts")
    overlap = float(np.abs(np.vdot(a.amps, b.amps)) ** 2)
    return min(1.0, max(0.0, overlap))
