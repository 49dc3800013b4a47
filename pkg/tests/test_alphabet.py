"""Alphabets, distributions, partitions, and the partition-structure algebra."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from structent import (
    Alphabet,
    Distribution,
    LazyPowerStructure,
    Partition,
    PartitionStructure,
    ValidationError,
    ZeroMassSubset,
    build_q,
    combine,
    join,
    merge_inseparable,
    power_structure,
    product_structure,
    reduce,
    refines,
    restrict_distribution,
    restrict_structure,
)
from structent.sampling import random_partition, random_structure


def P(alpha, *probs):
    return Distribution(alpha, probs)


class TestAlphabet:
    def test_letters_keep_insertion_order(self):
        A = Alphabet(("z", "a", "m"))
        assert A.letters == ("z", "a", "m")
        assert [A.index_of(x) for x in "zam"] == [0, 1, 2]

    def test_duplicate_letters_rejected(self):
        with pytest.raises(ValidationError):
            Alphabet(("a", "a"))

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            Alphabet(())


class TestDistribution:
    def test_sum_tolerance(self):
        A = Alphabet(("a", "b"))
        Distribution(A, (0.5, 0.499999999))  # within 1e-9
        with pytest.raises(ValidationError):
            Distribution(A, (0.5, 0.49))

    def test_explicit_renormalize(self):
        A = Alphabet(("a", "b"))
        d = Distribution(A, (1.0, 1.0), renormalize=True)
        assert d.probs == (0.5, 0.5)

    def test_negative_rejected(self):
        A = Alphabet(("a", "b"))
        with pytest.raises(ValidationError):
            Distribution(A, (1.5, -0.5))

    def test_mass(self):
        A = Alphabet(("a", "b", "c"))
        d = P(A, 0.2, 0.3, 0.5)
        assert d.mass(("a", "c")) == pytest.approx(0.7)


class TestRestrictDistribution:
    def test_symmetric_split(self):
        A = Alphabet(("a", "b", "c"))
        r = restrict_distribution(P(A, 0.5, 0.25, 0.25), ("b", "c"))
        assert r.probs == pytest.approx((0.5, 0.5))

    def test_identity(self):
        A = Alphabet(("a", "b", "c"))
        r = restrict_distribution(P(A, 0.5, 0.25, 0.25), ("a", "b", "c"))
        assert r.probs == pytest.approx((0.5, 0.25, 0.25))

    def test_hand_normalization(self):
        A = Alphabet(("a", "b", "c"))
        r = restrict_distribution(P(A, 0.2, 0.3, 0.5), ("a", "c"))
        assert r.probs == pytest.approx((2 / 7, 5 / 7), abs=1e-15)

    def test_zero_mass_subset(self):
        A = Alphabet(("a", "b", "c"))
        with pytest.raises(ZeroMassSubset):
            restrict_distribution(P(A, 1.0, 0.0, 0.0), ("b", "c"))


class TestReduce:
    def test_pairwise_merge(self, abcd, uniform4):
        s = Partition(abcd, [("a", "b"), ("c", "d")])
        assert reduce(uniform4, s).probs == pytest.approx((0.5, 0.5))

    def test_singleton_identity(self):
        A = Alphabet(("a", "b", "c"))
        d = P(A, 0.5, 0.25, 0.25)
        assert reduce(d, Partition.singletons(A)).probs == pytest.approx(d.probs)

    def test_cross_merge(self, abcd):
        d = P(abcd, 0.1, 0.2, 0.3, 0.4)
        s = Partition(abcd, [("a", "d"), ("b", "c")])
        assert reduce(d, s).probs == pytest.approx((0.5, 0.5))

    def test_sums_to_one(self, abcd):
        rng = np.random.default_rng(0)
        for _ in range(50):
            probs = rng.dirichlet(np.ones(4))
            d = Distribution(abcd, probs, renormalize=True)
            s = random_partition(abcd, rng)
            assert math.fsum(reduce(d, s).probs) == pytest.approx(1.0, abs=1e-12)


class TestJoinRefines:
    def test_cross_join_gives_singletons(self, abcd):
        s = Partition(abcd, [("a", "b"), ("c", "d")])
        t = Partition(abcd, [("a", "c"), ("b", "d")])
        assert join(s, t) == Partition.singletons(abcd)

    def test_join_idempotent(self, abcd):
        s = Partition(abcd, [("a", "b"), ("c", "d")])
        assert join(s, s) == s

    def test_singletons_absorb(self, abcd):
        s = Partition.singletons(abcd)
        t = Partition(abcd, [("a", "b", "c"), ("d",)])
        assert join(s, t) == s

    def test_singletons_refine_everything(self, abcd):
        t = Partition(abcd, [("a", "b", "c"), ("d",)])
        assert refines(Partition.singletons(abcd), t)

    def test_cross_partitions_do_not_refine(self, abcd):
        s = Partition(abcd, [("a", "b"), ("c", "d")])
        t = Partition(abcd, [("a", "c"), ("b", "d")])
        assert not refines(s, t)
        assert not refines(t, s)

    def test_refines_reflexive(self, abcd):
        s = Partition(abcd, [("a", "b"), ("c", "d")])
        assert refines(s, s)

    def test_lattice_laws_random(self):
        A = Alphabet(tuple("abcdefgh"))
        rng = np.random.default_rng(1)
        for _ in range(60):
            s, t, u = (random_partition(A, rng) for _ in range(3))
            assert join(s, t) == join(t, s)
            assert join(join(s, t), u) == join(s, join(t, u))
            assert join(s, s) == s
            assert refines(join(s, t), s)
            # partial order: antisymmetry and transitivity
            if refines(s, t) and refines(t, s):
                assert s == t
            if refines(s, t) and refines(t, u):
                assert refines(s, u)


class TestPartitionStructure:
    def test_duplicate_partitions_merge(self, abcd):
        s = Partition(abcd, [("a", "b"), ("c", "d")])
        S = PartitionStructure(abcd, [(s, 0.25), (s, 0.35)])
        assert len(S) == 1
        assert S.measure_of(s) == pytest.approx(0.6)

    def test_negative_measure_rejected(self, abcd):
        s = Partition(abcd, [("a", "b"), ("c", "d")])
        with pytest.raises(ValidationError):
            PartitionStructure(abcd, [(s, -0.1)])

    def test_flags(self, mixed_structure, abcd):
        assert mixed_structure.is_normalized
        assert mixed_structure.is_separating
        pairs_only = PartitionStructure(
            abcd, [(Partition(abcd, [("a", "b"), ("c", "d")]), 1.0)]
        )
        assert not pairs_only.is_separating  # a,b never separated

    def test_traditional(self, abcd):
        S = PartitionStructure.traditional(abcd)
        assert len(S) == 1
        assert S.is_normalized and S.is_separating


class TestRestrictStructure:
    def test_pair_partition_restriction_dropped(self, mixed_structure):
        R = restrict_structure(mixed_structure, ("a", "b"))
        assert len(R) == 1
        (s, m), = R.items()
        assert m == pytest.approx(0.6)
        assert s.components == (("a",), ("b",))

    def test_full_subset_identity(self, mixed_structure, abcd):
        assert restrict_structure(mixed_structure, abcd.letters) == mixed_structure

    def test_all_dropped_gives_empty(self):
        A = Alphabet(("a", "b", "c"))
        S = PartitionStructure(A, [(Partition(A, [("a",), ("b", "c")]), 1.0)])
        R = restrict_structure(S, ("b", "c"))
        assert len(R) == 0
        assert R.total_measure == 0.0

    def test_separating_preserved_when_pairs_were_separated(self):
        A = Alphabet(tuple("abcdef"))
        rng = np.random.default_rng(2)
        for _ in range(40):
            S = random_structure(A, rng)
            B = tuple(rng.choice(A.letters, size=3, replace=False))
            if not S.is_separating:
                continue
            R = restrict_structure(S, B)
            assert R.is_separating


class TestCombine:
    def test_same_partition_sums(self, abcd):
        s = Partition(abcd, [("a", "b"), ("c", "d")])
        S = combine(
            PartitionStructure(abcd, [(s, 0.6)]), PartitionStructure(abcd, [(s, 0.4)])
        )
        assert len(S) == 1 and S.measure_of(s) == pytest.approx(1.0)

    def test_disjoint_union(self, abcd):
        s = Partition(abcd, [("a", "b"), ("c", "d")])
        t = Partition(abcd, [("a", "c"), ("b", "d")])
        S = combine(
            PartitionStructure(abcd, [(s, 0.6)]), PartitionStructure(abcd, [(t, 0.4)])
        )
        assert len(S) == 2
        assert S.measure_of(s) == pytest.approx(0.6)
        assert S.measure_of(t) == pytest.approx(0.4)

    def test_empty_is_identity(self, mixed_structure, abcd):
        empty = PartitionStructure(abcd, [])
        assert combine(mixed_structure, empty) == mixed_structure


class TestProductAndPower:
    def test_square_measures(self, mixed_structure):
        sq = product_structure(mixed_structure, mixed_structure)
        measures = sorted(m for _, m in sq.items())
        assert measures == pytest.approx([0.16, 0.24, 0.24, 0.36])
        assert sq.total_measure == pytest.approx(1.0)

    def test_traditional_square(self, abcd):
        S = PartitionStructure.traditional(abcd)
        sq = product_structure(S, S)
        assert len(sq) == 1
        (s, m), = sq.items()
        assert m == pytest.approx(1.0)
        assert len(s) == 16  # singletons of the product alphabet

    def test_normalized_product_normalized(self, abcd):
        rng = np.random.default_rng(3)
        for _ in range(20):
            S1 = random_structure(abcd, rng, normalized=True)
            S2 = random_structure(abcd, rng, normalized=True)
            assert product_structure(S1, S2).is_normalized

    def test_total_measure_multiplies(self, abcd):
        rng = np.random.default_rng(4)
        for _ in range(20):
            S1 = random_structure(abcd, rng)
            S2 = random_structure(abcd, rng)
            prod = product_structure(S1, S2)
            assert prod.total_measure == pytest.approx(
                S1.total_measure * S2.total_measure
            )

    def test_power_eager_matches_lazy(self, mixed_structure):
        eager = power_structure(mixed_structure, 2)
        lazy = LazyPowerStructure(mixed_structure, 2)
        eager_items = {(s.components, round(m, 12)) for s, m in eager.items()}
        lazy_items = {(s.components, round(m, 12)) for s, m in lazy.items()}
        assert eager_items == lazy_items

    def test_power_lazy_above_three(self, mixed_structure):
        big = power_structure(mixed_structure, 4)
        assert isinstance(big, LazyPowerStructure)
        assert len(big) == 16
        assert big.total_measure == pytest.approx(1.0)


class TestBuildQ:
    def test_traditional(self):
        A = Alphabet(("a", "b"))
        Q = build_q(P(A, 0.3, 0.7), PartitionStructure.traditional(A))
        assert sorted(Q.q) == pytest.approx([0.3, 0.7])
        assert Q.is_probability

    def test_mixed_structure_pairs(self, uniform4, mixed_structure):
        Q = build_q(uniform4, mixed_structure)
        assert sorted(Q.q) == pytest.approx([0.15, 0.15, 0.15, 0.15, 0.2, 0.2])
        assert Q.total == pytest.approx(1.0)

    def test_non_normalized_total(self, abcd, uniform4):
        s = Partition(abcd, [("a", "b"), ("c", "d")])
        S = PartitionStructure(abcd, [(s, 2.0)])
        Q = build_q(uniform4, S)
        assert Q.total == pytest.approx(2.0)
        assert not Q.is_probability

    def test_total_equals_structure_mass_random(self, abcd, uniform4):
        rng = np.random.default_rng(5)
        for _ in range(30):
            S = random_structure(abcd, rng)
            assert build_q(uniform4, S).total == pytest.approx(
                S.total_measure, abs=1e-12
            )


class TestMergeInseparable:
    def test_merges_unseparated_pair(self, abcd):
        S = PartitionStructure(
            abcd, [(Partition(abcd, [("a", "b"), ("c", "d")]), 1.0)]
        )
        groups, merged = merge_inseparable(S)
        assert sorted(tuple(sorted(g)) for g in groups) == [("a", "b"), ("c", "d")]
        assert merged.is_separating

    def test_separating_structure_unchanged(self, mixed_structure):
        groups, merged = merge_inseparable(mixed_structure)
        assert all(len(g) == 1 for g in groups)


@given(
    hst.integers(min_value=2, max_value=7),
    hst.integers(min_value=0, max_value=10_000),
)
@settings(max_examples=40, deadline=None)
def test_join_refines_property(n, seed):
    A = Alphabet(tuple(f"x{i}" for i in range(n)))
    rng = np.random.default_rng(seed)
    s = random_partition(A, rng)
    t = random_partition(A, rng)
    j = join(s, t)
    assert refines(j, s) and refines(j, t)
    # join is the coarsest common refinement: any u refining both refines j
    u = random_partition(A, rng)
    if refines(u, s) and refines(u, t):
        assert refines(u, j)
