"""Classical and quantum information measures, plus n-gram surprisal models.

All logarithms are base 2 and 0*log(0) is taken as 0.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .qstate import DensityMatrix, StateVector, partial_trace

_SUM_TOL = 1e-10
_EIG_FLOOR = 1e-12


@dataclass(frozen=True)
class Distribution:
    """Probability vector: nonnegative entries summing to 1."""

    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.ascontiguousarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a nonempty 1-d array")
        if (p < -_SUM_TOL).any():
            raise ValueError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > _SUM_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, expected 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)


def _plogp(p: np.ndarray) -> float:
    # clamp: eigenvalues a hair above 1 would otherwise go slightly negative
    p = p[p > 0]
    return max(0.0, float(-(p * np.log2(p)).sum()))


def shannon_entropy(d: Distribution | Sequence[float] | np.ndarray) -> float:
    """Entropy in bits of a discrete distribution."""
    if not isinstance(d, Distribution):
        d = Distribution(np.asarray(d, dtype=np.float64))
    return _plogp(d.probs)


def transinformation(joint: np.ndarray) -> float:
    """Mutual information I(X;Y) in bits from a joint probability matrix.

    Here it measures how faithfully a copy channel preserves the original:
    1 bit for a perfect binary copy, 0 for a useless one.
    """
    j = np.asarray(joint, dtype=np.float64)
    if j.ndim != 2:
        raise ValueError("joint must be a 2-d matrix of probabilities")
    if (j < -_SUM_TOL).any():
        raise ValueError("joint entries must be nonnegative")
    if abs(j.sum() - 1.0) > _SUM_TOL:
        raise ValueError(f"joint sums to {j.sum()!r}, expected 1")
    hx = _plogp(j.sum(axis=1))
    hy = _plogp(j.sum(axis=0))
    hxy = _plogp(j.reshape(-1))
    return max(0.0, hx + hy - hxy)


def von_neumann_entropy(rho: DensityMatrix | np.ndarray) -> float:
    """Entropy in bits of a density matrix via its (Hermitian) eigenvalues."""
    elems = rho.elems if isinstance(rho, DensityMatrix) else np.asarray(rho)
    eigs = np.linalg.eigvalsh(elems)
    return _plogp(eigs[eigs > _EIG_FLOOR])


def quantum_mutual_information(
    global_state: StateVector, part_a: Iterable[str], part_b: Iterable[str]
) -> float:
    """S(A) + S(B) - S(AB) in bits for disjoint subsystem sets."""
    a, b = set(part_a), set(part_b)
    if not a or not b:
        raise ValueError("both subsystem sets must be nonempty")
    if a & b:
        raise ValueError(f"subsystem sets overlap: {sorted(a & b)}")
    s_a = von_neumann_entropy(partial_trace(global_state, a))
    s_b = von_neumann_entropy(partial_trace(global_state, b))
    s_ab = von_neumann_entropy(partial_trace(global_state, a | b))
    return max(0.0, s_a + s_b - s_ab)


@dataclass(frozen=True)
class NGramModel:
    """Symbol-frequency tables keyed by fixed-length contexts."""

    order: int
    counts: dict[tuple, Counter] = field(repr=False)
    alphabet: frozenset

    def probability(self, context: tuple, symbol) -> float:
        """MLE for seen events; add-one fallback keeps unseen events finite."""
        table = self.counts.get(context)
        total = sum(table.values()) if table else 0
        seen = table[symbol] if table else 0
        if seen > 0:
            return seen / total
        return 1.0 / (total + len(self.alphabet))


def build_ngram(
    corpus: Sequence, order: int, alphabet: Iterable | None = None
) -> NGramModel:
    """Tabulate all length-(order+1) windows of the corpus."""
    if order < 0:
        raise ValueError("order must be >= 0")
    if len(corpus) <= order:
        raise ValueError(
            f"corpus of length {len(corpus)} is too short for order {order}"
        )
    symbols = frozenset(alphabet) if alphabet is not None else frozenset(corpus)
    counts: dict[tuple, Counter] = {}
    for i in range(order, len(corpus)):
        context = tuple(corpus[i - order:i])
        counts.setdefault(context, Counter())[corpus[i]] += 1
    return NGramModel(order=order, counts=counts, alphabet=symbols)


def observer_surprisal(model: NGramModel | Sequence, text: Sequence) -> float:
    """Mean surprisal in bits per symbol, for a model-based or memorizing reader.

    A reader who memorized the exact text is never surprised: 0.0 on a match,
    infinity otherwise. A model-based reader pays -log2 P(symbol | context)
    averaged over every position with a full context.
    """
    if not isinstance(model, NGramModel):
        memorized = tuple(model)
        return 0.0 if tuple(text) == memorized else float("inf")

    unknown = set(text) - model.alphabet
    if unknown:
        raise ValueError(f"text symbols {sorted(map(str, unknown))} not in the alphabet")
    if len(text) <= model.order:
        raise ValueError(
            f"text of length {len(text)} has no position with a full "
            f"order-{model.order} context"
        )
    bits = 0.0
    positions = 0
    for i in range(model.order, len(text)):
        context = tuple(text[i - model.order:i])
        bits -= np.log2(model.probability(context, text[i]))
        positions += 1
    return bits / positions
