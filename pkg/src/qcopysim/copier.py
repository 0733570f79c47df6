"""Copier unitaries, multi-copy chains, and LIFO erasure with provenance records.

The two-level copier is the controlled-NOT truth table: a source symbol lands
in a target prepared in its blank ("pm") basis state; seeding the target with
the orthogonal ("um") state inverts the recorded convention instead of
failing, because the operation must stay unitary. For d levels the rule is
modular: target index t becomes (i + t - pm) mod d for source symbol i.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EscapedSubsystemError, NonSuffixErasureError, TargetNotReadyError
from .qstate import ATOL, StateVector, SubsystemLayout, UnitaryOp, apply_unitary

FROM_SOURCE = "from-source"
CHAINED = "chained"


@dataclass(frozen=True)
class CopierSpec:
    """Recipe for one copy operation between two equal-dimension subsystems.

    ``source_basis`` optionally reorders which source basis labels encode
    symbols 0..d-1 (default: layout order). ``target_pm_index`` selects which
    target basis state acts as the blank medium. ``permutation`` optionally
    relabels the source symbol i to permutation[i] during the copy.
    """

    source: str
    target: str
    source_basis: tuple[str, ...] | None = None
    target_pm_index: int = 0
    permutation: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError("source and target must differ")
        if self.source_basis is not None:
            object.__setattr__(self, "source_basis", tuple(self.source_basis))
        if self.permutation is not None:
            perm = tuple(self.permutation)
            if sorted(perm) != list(range(len(perm))):
                raise ValueError(f"permutation {perm} is not a bijection")
            object.__setattr__(self, "permutation", perm)


@dataclass
class CopyRecord:
    """Provenance of one applied copy; sequence numbers increase within a run."""

    seq: int
    source: str
    target: str
    spec: CopierSpec
    escaped: bool = False
    convention_inverted: bool = False

    def mark_escaped(self) -> None:
        # monotone: once escaped, always escaped
        self.escaped = True


def _symbol_order(spec: CopierSpec, layout: SubsystemLayout) -> list[int]:
    """Map logical symbol i to the source's physical basis index."""
    src = layout.subsystem(spec.source)
    if spec.source_basis is None:
        return list(range(src.dim))
    if sorted(spec.source_basis) != sorted(src.symbol_basis):
        raise ValueError(
            f"source_basis {spec.source_basis} must relabel the basis of "
            f"{spec.source!r} {src.symbol_basis}"
        )
    return [src.symbol_basis.index(lbl) for lbl in spec.source_basis]


def build_copier(spec: CopierSpec, layout: SubsystemLayout) -> UnitaryOp:
    """Permutation unitary on (source, target) realizing the copy rule."""
    d = layout.dim_of(spec.source)
    if layout.dim_of(spec.target) != d:
        raise ValueError(
            f"source {spec.source!r} (dim {d}) and target {spec.target!r} "
            f"(dim {layout.dim_of(spec.target)}) must have equal dimensions"
        )
    pm = spec.target_pm_index
    if not 0 <= pm < d:
        raise ValueError(f"target_pm_index {pm} out of range for dim {d}")
    perm = spec.permutation or tuple(range(d))
    if len(perm) != d:
        raise ValueError(f"permutation length {len(perm)} != dim {d}")
    phys = _symbol_order(spec, layout)
    logical = {p: i for i, p in enumerate(phys)}

    matrix = np.zeros((d * d, d * d), dtype=np.complex128)
    for p in range(d):
        i = logical[p]
        out_p = phys[perm[i]]
        for t in range(d):
            out_t = (i + t - pm) % d
            matrix[out_p * d + out_t, p * d + t] = 1.0
    return UnitaryOp((spec.source, spec.target), matrix)


def _pm_weight(state: StateVector, label: str, pm_index: int) -> float:
    """Probability that ``label`` is found in its blank-medium basis state."""
    pos = state.layout.position(label)
    psi = np.moveaxis(state.tensor(), pos, 0)
    return float(np.sum(np.abs(psi[pm_index]) ** 2))


def apply_copy(
    state: StateVector,
    spec: CopierSpec,
    log: Sequence[CopyRecord] = (),
) -> tuple[StateVector, list[CopyRecord]]:
    """Apply one copy and append its provenance record.

    A target found entirely outside its blank state is recorded as
    convention-inverted rather than rejected; the operation is unitary either
    way.
    """
    inverted = _pm_weight(state, spec.target, spec.target_pm_index) < ATOL
    new_state = apply_unitary(state, build_copier(spec, state.layout))
    seq = log[-1].seq + 1 if log else 1
    record = CopyRecord(
        seq=seq,
        source=spec.source,
        target=spec.target,
        spec=spec,
        convention_inverted=inverted,
    )
    return new_state, [*log, record]


def multi_copy(
    state: StateVector,
    source: str,
    targets: Sequence[str],
    chain_mode: str = FROM_SOURCE,
    log: Sequence[CopyRecord] = (),
) -> tuple[StateVector, list[CopyRecord]]:
    """Copy the source symbol onto every target with the same symbol basis.

    Both modes produce the same chain state on symbol-basis superpositions:
    ``from-source`` copies source -> each target, ``chained`` copies each
    fresh target from the previous one. Every target must start in its blank
    state.
    """
    if chain_mode not in (FROM_SOURCE, CHAINED):
        raise ValueError(f"chain_mode must be {FROM_SOURCE!r} or {CHAINED!r}")
    if not targets:
        raise ValueError("no targets given")
    for t in targets:
        if 1.0 - _pm_weight(state, t, 0) > ATOL:
            raise TargetNotReadyError(
                f"target {t!r} is not in its blank-medium state"
            )
    out = state
    records = list(log)
    prev = source
    for t in targets:
        src = source if chain_mode == FROM_SOURCE else prev
        out, records = apply_copy(out, CopierSpec(source=src, target=t), records)
        prev = t
    return out, records


def erase_copies(
    state: StateVector,
    log: Sequence[CopyRecord],
    which: Iterable[CopyRecord | int],
) -> tuple[StateVector, list[CopyRecord]]:
    """Undo the selected copies by applying their inverses in reverse order.

    The selection must be the most recent operations touching the subsystems
    involved (a LIFO suffix); anything else cannot be guaranteed to compose
    back to the identity. Records whose subsystems escaped are permanently
    out of reach.
    """
    by_seq = {r.seq: r for r in log}
    chosen: list[CopyRecord] = []
    for w in which:
        seq = w.seq if isinstance(w, CopyRecord) else int(w)
        if seq not in by_seq:
            raise ValueError(f"record seq {seq} is not in the log")
        chosen.append(by_seq[seq])
    if not chosen:
        return state, list(log)
    chosen.sort(key=lambda r: r.seq)

    escaped = [r.seq for r in chosen if r.escaped]
    if escaped:
        raise EscapedSubsystemError(
            f"records {escaped} involve escaped subsystems and cannot be erased"
        )

    involved = {r.source for r in chosen} | {r.target for r in chosen}
    touching = [r for r in log if r.source in involved or r.target in involved]
    if [r.seq for r in touching[-len(chosen):]] != [r.seq for r in chosen]:
        raise NonSuffixErasureError(
            "selected records are not the latest operations on their subsystems"
        )

    out = state
    for r in reversed(chosen):
        out = apply_unitary(out, build_copier(r.spec, state.layout).inverse())
    chosen_seqs = {r.seq for r in chosen}
    return out, [r for r in log if r.seq not in chosen_seqs]
