"""Classical information kernels and their structure-weighted counterparts.

Every structure-weighted notion has the same shape: reduce the distribution
through each partition of the structure, apply the classical notion to the
reduced distribution, and sum weighted by the partition measures.  Under the
traditional structure (singletons, measure 1) each notion collapses exactly
to its classical counterpart.

All logarithms are base 2; values are in bits.  The conventions
0 * log(0) = 0 and 0 * log(0/0) = 0 apply throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .alphabet import (
    Alphabet,
    Distribution,
    Partition,
    PartitionStructure,
    PROB_TOL,
    StructuredSpace,
    build_q,
    reduced_probs,
)
from .errors import AlphabetMismatch, NotNormalized, ValidationError

LOG2 = math.log(2.0)


# ---------------------------------------------------------------- kernels


def entropy(probs: Iterable[float]) -> float:
    """Shannon entropy -sum p log2 p in bits."""
    return -math.fsum(p * math.log2(p) for p in probs if p > 0.0) + 0.0


def binary_entropy(p: float) -> float:
    """Entropy of a (p, 1-p) split."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def joint_entropy(matrix: np.ndarray) -> float:
    return entropy(np.asarray(matrix, dtype=float).ravel())


def conditional_entropy(matrix: np.ndarray) -> float:
    """H(row | column) of a joint probability matrix."""
    m = np.asarray(matrix, dtype=float)
    return joint_entropy(m) - entropy(m.sum(axis=0))


def mutual_information(matrix: np.ndarray) -> float:
    """I(row; column) of a joint probability matrix."""
    m = np.asarray(matrix, dtype=float)
    return entropy(m.sum(axis=1)) + entropy(m.sum(axis=0)) - joint_entropy(m)


def kl_divergence(p: Sequence[float], q: Sequence[float]) -> float:
    """Relative entropy D(p || q); +inf when p puts mass where q has none."""
    if len(p) != len(q):
        raise ValidationError("KL divergence needs vectors of equal length")
    total = 0.0
    for pi, qi in zip(p, q):
        if pi <= 0.0:
            continue
        if qi <= 0.0:
            return math.inf
        total += pi * math.log2(pi / qi)
    return total


# ------------------------------------------------------------ structured


@dataclass(frozen=True)
class StructuredAlphabet:
    """An alphabet with a distribution and a partition structure over it."""

    P: Distribution
    S: PartitionStructure

    def __post_init__(self) -> None:
        if self.P.alphabet != self.S.alphabet:
            raise AlphabetMismatch("distribution and structure use different alphabets")

    @property
    def alphabet(self) -> Alphabet:
        return self.P.alphabet


class JointDistribution:
    """A joint probability matrix over a pair of alphabets."""

    __slots__ = ("row_alphabet", "col_alphabet", "matrix")

    def __init__(self, row_alphabet: Alphabet, col_alphabet: Alphabet, matrix):
        m = np.asarray(matrix, dtype=float)
        if m.shape != (len(row_alphabet), len(col_alphabet)):
            raise ValidationError("joint matrix shape must match the alphabets")
        if np.isnan(m).any() or (m < -1e-12).any():
            raise ValidationError("joint probabilities must be non-negative")
        m = np.clip(m, 0.0, None)
        if abs(float(m.sum()) - 1.0) > PROB_TOL:
            raise ValidationError(f"joint probabilities sum to {float(m.sum())!r}, expected 1")
        self.row_alphabet = row_alphabet
        self.col_alphabet = col_alphabet
        self.matrix = m

    @classmethod
    def independent(cls, PA: Distribution, PB: Distribution) -> "JointDistribution":
        return cls(PA.alphabet, PB.alphabet, np.outer(PA.probs, PB.probs))

    @classmethod
    def identity_coupling(cls, P: Distribution) -> "JointDistribution":
        return cls(P.alphabet, P.alphabet, np.diag(np.asarray(P.probs, dtype=float)))

    def row_marginal(self) -> Distribution:
        return Distribution(self.row_alphabet, self.matrix.sum(axis=1), renormalize=False)

    def col_marginal(self) -> Distribution:
        return Distribution(self.col_alphabet, self.matrix.sum(axis=0), renormalize=False)

    def reduced(self, sA: Partition, sB: Partition) -> np.ndarray:
        """Joint matrix over components of sA x components of sB."""
        if sA.alphabet != self.row_alphabet or sB.alphabet != self.col_alphabet:
            raise AlphabetMismatch("partition alphabets do not match the joint")
        rows = np.fromiter((sA.component_of(a) for a in self.row_alphabet), dtype=int)
        cols = np.fromiter((sB.component_of(b) for b in self.col_alphabet), dtype=int)
        out = np.zeros((len(sA), len(sB)))
        np.add.at(out, (rows[:, None], cols[None, :]), self.matrix)
        return out


@dataclass(frozen=True)
class StructuredJoint:
    """A joint distribution with one partition structure per side."""

    joint: JointDistribution
    SA: PartitionStructure
    SB: PartitionStructure

    def __post_init__(self) -> None:
        if self.SA.alphabet != self.joint.row_alphabet:
            raise AlphabetMismatch("row structure uses a different alphabet")
        if self.SB.alphabet != self.joint.col_alphabet:
            raise AlphabetMismatch("column structure uses a different alphabet")


def h_s(X: StructuredAlphabet) -> float:
    """Structure entropy: sum over partitions of measure(s) * H(P reduced by s)."""
    P = X.P
    return math.fsum(m * entropy(reduced_probs(P, s)) for s, m in X.S.items() if m > 0.0)


def h_s_of(P: Distribution, S) -> float:
    """``h_s`` for a distribution and any structure-like object exposing
    ``items()``; also accepts lazy product structures."""
    return math.fsum(m * entropy(reduced_probs(P, s)) for s, m in S.items() if m > 0.0)


def h_s_joint(J: StructuredJoint) -> float:
    """Joint structure entropy: both sides reduced, weighted by the product
    of the two partition measures."""
    return math.fsum(
        mA * mB * joint_entropy(J.joint.reduced(sA, sB))
        for sA, mA in J.SA.items()
        if mA > 0.0
        for sB, mB in J.SB.items()
        if mB > 0.0
    )


def h_s_conditional(J: StructuredJoint, direction: str = "row|col") -> float:
    """Conditional structure entropy.

    ``direction`` selects H(row | col) or H(col | row); each reduced joint
    contributes its classical conditional entropy, weighted by the product
    of the partition measures of both sides.
    """
    if direction not in ("row|col", "col|row"):
        raise ValidationError("direction must be 'row|col' or 'col|row'")
    total = 0.0
    for sA, mA in J.SA.items():
        if mA <= 0.0:
            continue
        for sB, mB in J.SB.items():
            if mB <= 0.0:
                continue
            red = J.joint.reduced(sA, sB)
            if direction == "col|row":
                red = red.T
            total += mA * mB * conditional_entropy(red)
    return total


def i_s(J: StructuredJoint) -> float:
    """Structure mutual information: measure-weighted classical mutual
    information of every reduced joint."""
    return math.fsum(
        mA * mB * mutual_information(J.joint.reduced(sA, sB))
        for sA, mA in J.SA.items()
        if mA > 0.0
        for sB, mB in J.SB.items()
        if mB > 0.0
    )


def d_kl_s(X: StructuredAlphabet, Q: Distribution) -> float:
    """Structure relative entropy between two distributions on one alphabet,
    weighted by the structure of ``X``.  Returns +inf when some reduced
    component has Q-mass 0 but positive P-mass."""
    if Q.alphabet != X.alphabet:
        raise AlphabetMismatch("distributions use different alphabets")
    total = 0.0
    for s, m in X.S.items():
        if m <= 0.0:
            continue
        term = kl_divergence(reduced_probs(X.P, s), reduced_probs(Q, s))
        if math.isinf(term):
            return math.inf
        total += m * term
    return total


def h_s_via_q(X: StructuredAlphabet) -> float:
    """Structure entropy computed through the weighted pair space:
    H(Q) - H(measures).  Requires a normalized structure."""
    if not X.S.is_normalized:
        raise NotNormalized("the pair-space identity needs total measure 1")
    Q: StructuredSpace = build_q(X.P, X.S)
    return entropy(Q.q) - entropy(X.S.measures)
