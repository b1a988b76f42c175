import math
import random
from itertools import permutations

import pytest

from graphcanon import Permutation, PermutationGroup, group_new


def closure(n, gens):
    """Brute-force closure of a generator list, as a set of image tuples."""
    ident = tuple(range(1, n + 1))
    seen = {ident}
    frontier = [ident]
    gen_tuples = [g.images() for g in gens]
    while frontier:
        cur = frontier.pop()
        for g in gen_tuples:
            nxt = tuple(g[cur[i] - 1] for i in range(n))
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def random_perm(rng, n):
    images = list(range(1, n + 1))
    rng.shuffle(images)
    return Permutation(images)


class TestBasics:
    def test_trivial_group(self):
        g = group_new(5)
        assert g.order() == 1
        assert g.orbits(range(1, 6)) == [[1], [2], [3], [4], [5]]
        assert g.membership(Permutation.identity(5))

    def test_extend_transposition(self):
        g = group_new(3)
        assert g.extend(Permutation.from_cycles("(1 2)", 3))
        assert g.order() == 2

    def test_extend_existing_returns_false(self):
        g = group_new(3)
        p = Permutation.from_cycles("(1 2)", 3)
        assert g.extend(p)
        assert not g.extend(p)
        assert g.order() == 2

    def test_symmetric_group_4(self):
        g = group_new(4)
        g.extend(Permutation.from_cycles("(1 2)", 4))
        g.extend(Permutation.from_cycles("(1 2 3 4)", 4))
        assert g.order() == 24

    def test_degree_mismatch(self):
        g = group_new(4)
        with pytest.raises(ValueError):
            g.extend(Permutation.from_cycles("(1 2)", 5))
        with pytest.raises(ValueError):
            g.membership(Permutation.identity(3))


class TestMembership:
    def test_identity_always_member(self):
        g = group_new(3)
        assert g.membership(Permutation.identity(3))

    def test_transposition_not_in_other(self):
        g = group_new(3)
        g.extend(Permutation.from_cycles("(1 2)", 3))
        assert not g.membership(Permutation.from_cycles("(1 3)", 3))

    def test_product_member(self):
        g = group_new(3)
        g.extend(Permutation.from_cycles("(1 2)", 3))
        g.extend(Permutation.from_cycles("(1 2 3)", 3))
        assert g.membership(Permutation.from_cycles("(1 3 2)", 3))


class TestOrbits:
    def test_paired_transpositions(self):
        g = group_new(4)
        g.extend(Permutation.from_cycles("(1 2)(3 4)", 4))
        assert g.orbits([1, 2, 3, 4]) == [[1, 2], [3, 4]]

    def test_full_orbit(self):
        g = group_new(4)
        g.extend(Permutation.from_cycles("(1 2)", 4))
        g.extend(Permutation.from_cycles("(1 2 3 4)", 4))
        assert g.orbits([1, 2, 3, 4]) == [[1, 2, 3, 4]]

    def test_restricted_subset(self):
        g = group_new(5)
        g.extend(Permutation.from_cycles("(1 2 3)", 5))
        assert g.orbits([2, 4]) == [[2], [4]]


class TestStabilizer:
    def test_s4_point_stabilizer(self):
        g = group_new(4)
        g.extend(Permutation.from_cycles("(1 2)", 4))
        g.extend(Permutation.from_cycles("(1 2 3 4)", 4))
        assert g.stabilizer([1]).order() == 6

    def test_empty_fix_is_whole_group(self):
        g = group_new(4)
        g.extend(Permutation.from_cycles("(1 2 3 4)", 4))
        assert g.stabilizer([]).order() == g.order()

    def test_klein_stabilizer_trivial(self):
        g = group_new(4)
        g.extend(Permutation.from_cycles("(1 2)(3 4)", 4))
        assert g.stabilizer([1]).order() == 1

    def test_orbit_stabilizer_identity(self):
        rng = random.Random(17)
        for _ in range(20):
            n = rng.randint(3, 7)
            g = group_new(n)
            for _ in range(rng.randint(1, 3)):
                g.extend(random_perm(rng, n))
            b = rng.randint(1, n)
            orbit = next(o for o in g.orbits(range(1, n + 1)) if b in o)
            assert g.stabilizer([b]).order() * len(orbit) == g.order()


class TestOrder:
    def test_s100_factorial(self):
        g = group_new(100)
        g.extend(Permutation.from_cycles("(1 2)", 100))
        g.extend(Permutation(list(range(2, 101)) + [1]))
        assert g.order() == math.factorial(100)

    def test_klein_four(self):
        g = group_new(4)
        g.extend(Permutation.from_cycles("(1 2)(3 4)", 4))
        g.extend(Permutation.from_cycles("(1 3)(2 4)", 4))
        assert g.order() == 4


class TestAgainstClosure:
    def test_random_generator_sets(self):
        rng = random.Random(99)
        for trial in range(200):
            n = rng.randint(2, 8)
            gens = [random_perm(rng, n) for _ in range(rng.randint(1, 3))]
            g = group_new(n)
            for p in gens:
                g.extend(p)
            cl = closure(n, gens)
            assert g.order() == len(cl), f"trial {trial}"
            for _ in range(10):
                p = random_perm(rng, n)
                assert g.membership(p) == (p.images() in cl)

    def test_extend_idempotent(self):
        rng = random.Random(4)
        for _ in range(30):
            n = rng.randint(2, 7)
            g = group_new(n)
            p = random_perm(rng, n)
            first = g.extend(p)
            order = g.order()
            assert g.extend(p) is False
            assert g.order() == order
            assert first == (order > 1)


class TestBasePrescription:
    def test_prescribed_prefix_respected(self):
        g = group_new(6)
        g.prescribe_base([3, 1, 4])
        g.extend(Permutation.from_cycles("(1 2)", 6))
        g.extend(Permutation.from_cycles("(1 2 3 4 5 6)", 6))
        assert g.base[:3] == (3, 1, 4)
        assert g.order() == math.factorial(6)

    def test_fixing_generators_exact_on_base_prefix(self):
        g = group_new(4)
        g.prescribe_base([1])
        g.extend(Permutation.from_cycles("(1 2)", 4))
        g.extend(Permutation.from_cycles("(1 2 3 4)", 4))
        sub = group_new(4)
        for arr in g.fixing_generator_arrays([1]):
            sub.extend(Permutation(list(int(x) + 1 for x in arr)))
        assert sub.order() == 6

    def test_serialization_roundtrip(self):
        g = group_new(6)
        g.extend(Permutation.from_cycles("(1 2)(5 6)", 6))
        for p in g.generators():
            assert Permutation.from_cycles(p.cycles(), 6) == p
