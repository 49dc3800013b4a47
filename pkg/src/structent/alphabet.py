"""Finite alphabets, distributions, partitions, and partition structures.

A *partition structure* ``(S, measure)`` assigns a non-negative measure to
each partition of an alphabet.  It is the basic object everything else in
the package consumes: entropy notions weight classical quantities by the
measures, distances count the measure of separating partitions, and
ultrametric trees induce one structure per tree.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

from .errors import (
    AlphabetMismatch,
    EmptySubset,
    PartitionMismatch,
    ValidationError,
    ZeroMassSubset,
)

Letter = Hashable

#: absolute tolerance for probability / measure sums; the tiny extra term
#: keeps sums that are off by exactly 1e-9 (e.g. 0.999999999) on the
#: accepted side despite their own representation error
PROB_TOL = 1e-9 + 1e-15


@dataclass(frozen=True)
class Alphabet:
    """An ordered tuple of distinct hashable letters."""

    letters: tuple[Letter, ...]
    _index: dict[Letter, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        letters = tuple(self.letters)
        object.__setattr__(self, "letters", letters)
        index = {a: i for i, a in enumerate(letters)}
        if len(index) != len(letters):
            raise ValidationError("alphabet letters must be distinct")
        if not letters:
            raise ValidationError("alphabet must be non-empty")
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __contains__(self, letter: Letter) -> bool:
        return letter in self._index

    def index_of(self, letter: Letter) -> int:
        try:
            return self._index[letter]
        except KeyError:
            raise AlphabetMismatch(f"letter {letter!r} not in alphabet") from None

    def check_subset(self, subset: Iterable[Letter]) -> frozenset:
        B = frozenset(subset)
        for a in B:
            if a not in self._index:
                raise AlphabetMismatch(f"letter {a!r} not in alphabet")
        return B

    def sort_key(self, letters: Iterable[Letter]) -> tuple[Letter, ...]:
        """Letters of `letters` in alphabet order, as a tuple."""
        return tuple(sorted(letters, key=self._index.__getitem__))

    def restricted(self, subset: Iterable[Letter]) -> "Alphabet":
        B = self.check_subset(subset)
        if not B:
            raise EmptySubset("cannot restrict alphabet to the empty set")
        return Alphabet(tuple(a for a in self.letters if a in B))


@dataclass(frozen=True)
class Distribution:
    """A probability distribution over an :class:`Alphabet`.

    Entries must be non-negative and sum to 1 within ``PROB_TOL``.  Pass
    ``renormalize=True`` to accept any non-negative vector with positive
    total and scale it; no silent renormalization ever happens.
    """

    alphabet: Alphabet
    probs: tuple[float, ...]

    def __init__(self, alphabet: Alphabet, probs: Sequence[float], *, renormalize: bool = False):
        probs = tuple(float(p) for p in probs)
        if len(probs) != len(alphabet):
            raise ValidationError("probability vector length must match alphabet size")
        for p in probs:
            if p < -1e-12 or math.isnan(p):
                raise ValidationError(f"probabilities must be non-negative, got {p}")
        probs = tuple(max(p, 0.0) for p in probs)
        total = math.fsum(probs)
        if renormalize:
            if total <= 0.0:
                raise ValidationError("cannot renormalize a zero vector")
            probs = tuple(p / total for p in probs)
        elif abs(total - 1.0) > PROB_TOL:
            raise ValidationError(f"probabilities sum to {total!r}, expected 1")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_mapping(cls, alphabet: Alphabet, mapping: Mapping[Letter, float], **kw) -> "Distribution":
        return cls(alphabet, [mapping.get(a, 0.0) for a in alphabet], **kw)

    @classmethod
    def uniform(cls, alphabet: Alphabet) -> "Distribution":
        n = len(alphabet)
        return cls(alphabet, [1.0 / n] * n)

    def p(self, letter: Letter) -> float:
        return self.probs[self.alphabet.index_of(letter)]

    def mass(self, subset: Iterable[Letter]) -> float:
        B = self.alphabet.check_subset(subset)
        return math.fsum(self.probs[self.alphabet.index_of(a)] for a in B)

    def as_mapping(self) -> dict[Letter, float]:
        return dict(zip(self.alphabet.letters, self.probs))


@dataclass(frozen=True)
class Partition:
    """A partition of an alphabet into at least two non-empty blocks.

    Components are stored canonically: each block sorted in alphabet order,
    blocks ordered by their first letter.  Equality and hashing use that
    canonical form, so structurally equal partitions compare equal no matter
    how they were assembled.
    """

    alphabet: Alphabet
    components: tuple[tuple[Letter, ...], ...]
    _letter_component: dict[Letter, int] = field(init=False, repr=False, compare=False)

    def __init__(self, alphabet: Alphabet, components: Iterable[Iterable[Letter]]):
        blocks = [alphabet.sort_key(c) for c in components]
        if any(len(b) == 0 for b in blocks):
            raise PartitionMismatch("partition components must be non-empty")
        blocks.sort(key=lambda b: alphabet.index_of(b[0]))
        seen: dict[Letter, int] = {}
        for k, b in enumerate(blocks):
            for a in b:
                if a in seen:
                    raise PartitionMismatch(f"letter {a!r} appears in two components")
                seen[a] = k
        if len(seen) != len(alphabet):
            missing = [a for a in alphabet if a not in seen]
            raise PartitionMismatch(f"components do not cover the alphabet, missing {missing!r}")
        if len(blocks) < 2:
            raise PartitionMismatch("a partition needs at least two components")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "components", tuple(blocks))
        object.__setattr__(self, "_letter_component", seen)

    @classmethod
    def singletons(cls, alphabet: Alphabet) -> "Partition":
        return cls(alphabet, [[a] for a in alphabet])

    def __len__(self) -> int:
        return len(self.components)

    def component_of(self, letter: Letter) -> int:
        try:
            return self._letter_component[letter]
        except KeyError:
            raise AlphabetMismatch(f"letter {letter!r} not in alphabet") from None

    def component_index(self) -> Mapping[Letter, int]:
        return self._letter_component

    def separates(self, a: Letter, b: Letter) -> bool:
        return self.component_of(a) != self.component_of(b)


def _check_same_alphabet(x, y) -> None:
    if x.alphabet != y.alphabet:
        raise AlphabetMismatch("operands are defined over different alphabets")


def restrict_distribution(P: Distribution, subset: Iterable[Letter]) -> Distribution:
    """Condition ``P`` on a subset: P(a | B) = P(a) / P(B) for a in B."""
    B = P.alphabet.check_subset(subset)
    if not B:
        raise EmptySubset("cannot condition on the empty set")
    mass = P.mass(B)
    if mass <= 0.0:
        raise ZeroMassSubset("cannot condition on a zero-probability subset")
    sub = P.alphabet.restricted(B)
    return Distribution(sub, [P.p(a) / mass for a in sub], renormalize=True)


def reduce(P: Distribution, s: Partition) -> Distribution:
    """Push ``P`` forward through a partition: one letter per component.

    The reduced alphabet's letters are the components themselves, written as
    alphabet-ordered tuples of original letters.
    """
    _check_same_alphabet(P, s)
    probs = reduced_probs(P, s)
    return Distribution(Alphabet(s.components), probs, renormalize=False)


def reduced_probs(P: Distribution, s: Partition) -> list[float]:
    """Component masses of ``P`` under ``s``, in canonical component order."""
    _check_same_alphabet(P, s)
    sums = [0.0] * len(s.components)
    comp = s._letter_component
    for a, p in zip(P.alphabet.letters, P.probs):
        sums[comp[a]] += p
    return sums


def join(s: Partition, t: Partition) -> Partition:
    """Coarsest common refinement: blocks are the non-empty pairwise
    intersections of blocks of ``s`` with blocks of ``t``."""
    _check_same_alphabet(s, t)
    cells: dict[tuple[int, int], list[Letter]] = {}
    for a in s.alphabet:
        cells.setdefault((s.component_of(a), t.component_of(a)), []).append(a)
    return Partition(s.alphabet, cells.values())


def refines(s: Partition, t: Partition) -> bool:
    """True when every block of ``s`` sits inside a block of ``t``."""
    _check_same_alphabet(s, t)
    target: dict[int, int] = {}
    for a in s.alphabet:
        i, j = s.component_of(a), t.component_of(a)
        if target.setdefault(i, j) != j:
            return False
    return True


class PartitionStructure:
    """A finite set of partitions with non-negative measures.

    Structurally identical partitions passed twice are merged with their
    measures summed, so the stored partitions are distinct.  A structure may
    be empty (total measure 0), which acts as the identity for
    :func:`combine`.
    """

    __slots__ = ("alphabet", "partitions", "measures", "_separating")

    def __init__(
        self,
        alphabet: Alphabet,
        items: Iterable[tuple[Partition, float]] = (),
    ):
        merged: dict[Partition, float] = {}
        for s, m in items:
            if s.alphabet != alphabet:
                raise AlphabetMismatch("partition defined over a different alphabet")
            m = float(m)
            if m < -1e-12 or math.isnan(m):
                raise ValidationError(f"measures must be non-negative, got {m}")
            merged[s] = merged.get(s, 0.0) + max(m, 0.0)
        self.alphabet = alphabet
        self.partitions = tuple(merged.keys())
        self.measures = tuple(merged.values())
        self._separating: bool | None = None

    @classmethod
    def traditional(cls, alphabet: Alphabet) -> "PartitionStructure":
        """The structure carrying only the singleton partition with measure 1;
        every structure-weighted notion collapses to its classical value on it."""
        return cls(alphabet, [(Partition.singletons(alphabet), 1.0)])

    def items(self) -> Iterator[tuple[Partition, float]]:
        return iter(zip(self.partitions, self.measures))

    def __len__(self) -> int:
        return len(self.partitions)

    @property
    def total_measure(self) -> float:
        return math.fsum(self.measures)

    @property
    def is_normalized(self) -> bool:
        return abs(self.total_measure - 1.0) <= PROB_TOL

    @property
    def is_separating(self) -> bool:
        """True when every pair of letters is split by some positive-measure
        partition."""
        if self._separating is None:
            letters = self.alphabet.letters
            unsep = {frozenset(p) for p in itertools.combinations(letters, 2)}
            for s, m in self.items():
                if m <= 0.0 or not unsep:
                    continue
                unsep = {p for p in unsep if not s.separates(*tuple(p))}
            self._separating = not unsep
        return self._separating

    def measure_of(self, s: Partition) -> float:
        for t, m in self.items():
            if t == s:
                return m
        return 0.0

    def __eq__(self, other) -> bool:
        if not isinstance(other, PartitionStructure):
            return NotImplemented
        return self.alphabet == other.alphabet and dict(self.items()) == dict(other.items())

    def __repr__(self) -> str:
        return f"PartitionStructure({len(self.partitions)} partitions, total={self.total_measure:.6g})"


def restrict_structure(S: PartitionStructure, subset: Iterable[Letter]) -> PartitionStructure:
    """Restrict every partition to a subset of the alphabet.

    Restrictions that collapse to a single block are dropped; partitions
    whose restrictions coincide are merged with their measures summed.  The
    result is generally not normalized even when ``S`` is.
    """
    B = S.alphabet.check_subset(subset)
    if not B:
        raise EmptySubset("cannot restrict a structure to the empty set")
    sub = S.alphabet.restricted(B)
    out: list[tuple[Partition, float]] = []
    for s, m in S.items():
        blocks = [[a for a in c if a in B] for c in s.components]
        blocks = [b for b in blocks if b]
        if len(blocks) < 2:
            continue
        out.append((Partition(sub, blocks), m))
    return PartitionStructure(sub, out)


def combine(S1: PartitionStructure, S2: PartitionStructure) -> PartitionStructure:
    """Measure-wise sum of two structures over the same alphabet."""
    _check_same_alphabet(S1, S2)
    return PartitionStructure(S1.alphabet, list(S1.items()) + list(S2.items()))


def product_alphabet(A: Alphabet, B: Alphabet) -> Alphabet:
    return Alphabet(tuple(itertools.product(A.letters, B.letters)))


def product_partition(AB: Alphabet, sA: Partition, sB: Partition) -> Partition:
    blocks = [
        [(a, b) for a in ca for b in cb]
        for ca in sA.components
        for cb in sB.components
    ]
    return Partition(AB, blocks)


def product_structure(SA: PartitionStructure, SB: PartitionStructure) -> PartitionStructure:
    """Product structure over the product alphabet: one partition per pair
    (sA, sB) with blocks cA x cB and measure mA * mB."""
    AB = product_alphabet(SA.alphabet, SB.alphabet)
    items = [
        (product_partition(AB, sA, sB), mA * mB)
        for sA, mA in SA.items()
        for sB, mB in SB.items()
    ]
    return PartitionStructure(AB, items)


def sequence_alphabet(A: Alphabet, m: int) -> Alphabet:
    return Alphabet(tuple(itertools.product(A.letters, repeat=m)))


class LazyPowerStructure:
    """m-fold product of a structure with itself, never materialized.

    Provides the same ``items()`` iteration contract as
    :class:`PartitionStructure`; each yielded partition lives over the
    alphabet of length-m letter tuples.  Intended for consumers that stream
    over partitions (entropy notions) when the eager product would be large.
    """

    __slots__ = ("base", "m", "alphabet")

    def __init__(self, base: PartitionStructure, m: int):
        if m < 1:
            raise ValidationError("power requires m >= 1")
        self.base = base
        self.m = m
        self.alphabet = sequence_alphabet(base.alphabet, m)

    def items(self) -> Iterator[tuple[Partition, float]]:
        for combo in itertools.product(list(self.base.items()), repeat=self.m):
            parts = [s for s, _ in combo]
            measure = math.prod(m for _, m in combo)
            blocks = [
                [letters for letters in itertools.product(*comps)]
                for comps in itertools.product(*(p.components for p in parts))
            ]
            yield Partition(self.alphabet, blocks), measure

    @property
    def total_measure(self) -> float:
        return self.base.total_measure ** self.m

    @property
    def is_normalized(self) -> bool:
        return abs(self.total_measure - 1.0) <= PROB_TOL

    def __len__(self) -> int:
        return len(self.base) ** self.m


def power_structure(S: PartitionStructure, m: int):
    """m-fold self-product over length-m tuples.

    Materialized eagerly for m <= 3; larger powers return a
    :class:`LazyPowerStructure` exposing the same ``items()`` surface.
    """
    lazy = LazyPowerStructure(S, m)
    if m <= 3:
        return PartitionStructure(lazy.alphabet, lazy.items())
    return lazy


@dataclass(frozen=True)
class StructuredSpace:
    """The space of (component, partition) pairs with weights
    Q(i, s) = P(i) * measure(s)."""

    pairs: tuple[tuple[tuple[Letter, ...], Partition], ...]
    q: tuple[float, ...]

    @property
    def total(self) -> float:
        return math.fsum(self.q)

    @property
    def is_probability(self) -> bool:
        return abs(self.total - 1.0) <= PROB_TOL


def build_q(P: Distribution, S: PartitionStructure) -> StructuredSpace:
    """Assemble Q(i, s) = P(i) * measure(s) over all components of all
    partitions of ``S``.  The total equals the total measure of ``S``."""
    _check_same_alphabet(P, S)
    pairs: list[tuple[tuple[Letter, ...], Partition]] = []
    q: list[float] = []
    for s, m in S.items():
        masses = reduced_probs(P, s)
        for comp, pc in zip(s.components, masses):
            pairs.append((comp, s))
            q.append(pc * m)
    return StructuredSpace(tuple(pairs), tuple(q))


def merge_inseparable(S: PartitionStructure) -> tuple[tuple[tuple[Letter, ...], ...], PartitionStructure]:
    """Group letters never separated by a positive-measure partition.

    Returns the groups (alphabet-ordered tuples) and the structure rewritten
    over the merged alphabet, whose letters are those groups.  Never applied
    implicitly by any other operation.
    """
    A = S.alphabet
    parent = {a: a for a in A}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in itertools.combinations(A.letters, 2):
        if all(m <= 0.0 or not s.separates(a, b) for s, m in S.items()):
            parent[find(a)] = find(b)
    groups: dict[Letter, list[Letter]] = {}
    for a in A:
        groups.setdefault(find(a), []).append(a)
    keys = sorted((A.sort_key(g) for g in groups.values()), key=lambda g: A.index_of(g[0]))
    merged_alpha = Alphabet(tuple(keys))
    of_letter = {a: g for g in keys for a in g}
    items = []
    for s, m in S.items():
        blocks: dict[int, set] = {}
        for g in keys:
            blocks.setdefault(s.component_of(g[0]), set()).add(g)
        if len(blocks) >= 2:
            items.append((Partition(merged_alpha, blocks.values()), m))
    return tuple(keys), PartitionStructure(merged_alpha, items)
