"""Concordance between partitions and the distances it induces.

The concordance of a binary split ``t`` with a partition ``s`` measures how
much of the information in ``t`` is already carried by ``s``:

    C(t, s) = [H(P^s) - H(P^(s join t)) + H(P^t)] / H(P^t)

It is 1 when ``s`` refines ``t`` and 0 when the two are independent under
``P``.  Weighting concordances by the measures of a partition structure
gives the split merit ``d_hat``, and summing the measures of the partitions
that separate two letters gives a metric on the alphabet itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .alphabet import (
    Alphabet,
    Distribution,
    Letter,
    Partition,
    PartitionStructure,
    join,
    reduced_probs,
    restrict_distribution,
    restrict_structure,
)
from .errors import (
    AlphabetMismatch,
    DegenerateSplit,
    EmptySubset,
    ValidationError,
)
from .notions import StructuredAlphabet, entropy, h_s


@dataclass(frozen=True)
class BinarySplit:
    """An ordered pair of disjoint non-empty letter sets.

    The two sides need not cover the alphabet; operations that require a
    full binary partition condition on the union first.
    """

    left: frozenset
    right: frozenset

    def __init__(self, left: Iterable[Letter], right: Iterable[Letter]):
        L, R = frozenset(left), frozenset(right)
        if not L or not R:
            raise EmptySubset("both sides of a split must be non-empty")
        if L & R:
            raise ValidationError("split sides must be disjoint")
        object.__setattr__(self, "left", L)
        object.__setattr__(self, "right", R)

    @property
    def union(self) -> frozenset:
        return self.left | self.right

    def as_partition(self, alphabet: Alphabet) -> Partition:
        return Partition(alphabet, [self.left, self.right])


def concordance(t: Partition, s: Partition, P: Distribution) -> float:
    """C(t, s) as defined above; requires H(P^t) > 0."""
    if t.alphabet != P.alphabet or s.alphabet != P.alphabet:
        raise AlphabetMismatch("partitions and distribution must share an alphabet")
    ht = entropy(reduced_probs(P, t))
    if ht <= 0.0:
        raise DegenerateSplit("the reference partition carries no entropy")
    hs_ = entropy(reduced_probs(P, s))
    hj = entropy(reduced_probs(P, join(s, t)))
    return (hs_ - hj + ht) / ht


def _conditioned(split: BinarySplit, S: PartitionStructure, P: Distribution):
    """Condition structure and distribution on the split's union when the
    split does not cover the whole alphabet."""
    A = S.alphabet
    union = A.check_subset(split.union)
    if union == frozenset(A.letters):
        return split, S, P
    Pc = restrict_distribution(P, union)
    Sc = restrict_structure(S, union)
    return split, Sc, Pc


def d_hat(split: BinarySplit, S: PartitionStructure, P: Distribution) -> float:
    """Merit of a binary split under a structure: the measure-weighted sum
    of concordances of the split with every partition of the structure,

        d_hat(t) = sum_s measure(s) * C(t, s).

    A split over a strict subset of the alphabet is evaluated after
    conditioning both the structure and the distribution on its union.
    Degenerate splits (zero entropy) are rejected.
    """
    if S.alphabet != P.alphabet:
        raise AlphabetMismatch("structure and distribution must share an alphabet")
    split, S, P = _conditioned(split, S, P)
    t = split.as_partition(P.alphabet)
    ht = entropy(reduced_probs(P, t))
    if ht <= 0.0:
        raise DegenerateSplit("split carries no entropy under this distribution")
    total = 0.0
    for s, m in S.items():
        if m <= 0.0:
            continue
        hs_ = entropy(reduced_probs(P, s))
        hj = entropy(reduced_probs(P, join(s, t)))
        total += m * (hs_ - hj + ht)
    return total / ht


def d_hat_via_entropy_gap(split: BinarySplit, S: PartitionStructure, P: Distribution) -> float:
    """The same merit computed through the structure-entropy gap:

        [H_S(whole) - sum_j P(A_j) H_S(restricted to A_j)] / H(P^t)

    Agrees with :func:`d_hat` to floating-point accuracy.
    """
    if S.alphabet != P.alphabet:
        raise AlphabetMismatch("structure and distribution must share an alphabet")
    split, S, P = _conditioned(split, S, P)
    t = split.as_partition(P.alphabet)
    ht = entropy(reduced_probs(P, t))
    if ht <= 0.0:
        raise DegenerateSplit("split carries no entropy under this distribution")
    whole = h_s(StructuredAlphabet(P, S))
    gap = whole
    for side in (split.left, split.right):
        w = P.mass(side)
        if w <= 0.0 or len(side) == 1:
            continue
        Pr = restrict_distribution(P, side)
        Sr = restrict_structure(S, side)
        gap -= w * h_s(StructuredAlphabet(Pr, Sr))
    return gap / ht


def grouping_decompose(
    split: BinarySplit, X: StructuredAlphabet
) -> tuple[float, list[float]]:
    """Decompose the structure entropy across a binary split.

    Returns ``(merit, parts)`` where ``merit`` is :func:`d_hat` of the split
    and ``parts`` are the structure entropies of the two restricted spaces,
    so that

        H_S = merit * H(P^t) + sum_j P(A_j) * parts[j].
    """
    split_c, S, P = _conditioned(split, X.S, X.P)
    merit = d_hat(split_c, S, P)
    parts: list[float] = []
    for side in (split_c.left, split_c.right):
        if len(side) == 1 or P.mass(side) <= 0.0:
            parts.append(0.0)
            continue
        Pr = restrict_distribution(P, side)
        Sr = restrict_structure(S, side)
        parts.append(h_s(StructuredAlphabet(Pr, Sr)))
    return merit, parts


def state_distance(a: Letter, b: Letter, S: PartitionStructure) -> float:
    """Total measure of the partitions separating two letters.

    Symmetric, zero on the diagonal, and satisfies the triangle inequality;
    it does not depend on any distribution.
    """
    S.alphabet.index_of(a)
    S.alphabet.index_of(b)
    if a == b:
        return 0.0
    return math.fsum(m for s, m in S.items() if s.separates(a, b))


def state_distance_matrix(S: PartitionStructure) -> "DistanceMatrix":
    """All pairwise state distances in alphabet order."""
    from .ultrametric import DistanceMatrix

    letters = S.alphabet.letters
    n = len(letters)
    out = np.zeros((n, n))
    for s, m in S.items():
        if m <= 0.0:
            continue
        comp = [s.component_of(a) for a in letters]
        for i in range(n):
            for j in range(i + 1, n):
                if comp[i] != comp[j]:
                    out[i, j] += m
                    out[j, i] += m
    return DistanceMatrix(S.alphabet, out)
