import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from graphcanon import (
    ColoredGraph,
    OrderedPartition,
    Permutation,
    apply_permutation,
    is_automorphism,
    is_finer,
)

PI = OrderedPartition([[2, 3], [5], [1, 4]], 5)

# The worked six-vertex example: edges 12,13,14,23,25,36.
FIG_EDGES = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 5), (3, 6)]


def fig_graph():
    return ColoredGraph(6, FIG_EDGES, OrderedPartition([[4, 5, 6], [1, 2, 3]], 6))


class TestPosition:
    def test_first_cell(self):
        assert PI.position(2) == 1
        assert PI.position(3) == 1

    def test_last_cell(self):
        assert PI.position(1) == 4
        assert PI.position(4) == 4

    def test_middle(self):
        assert PI.position(5) == 3

    def test_unit_partition(self):
        unit = OrderedPartition.unit(7)
        for v in range(1, 8):
            assert unit.position(v) == 1

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            PI.position(6)
        with pytest.raises(ValueError):
            PI.position(0)


class TestIndex:
    def test_examples(self):
        assert PI.index(5) == 2
        assert PI.index(3) == 1
        assert PI.index(4) == 3

    def test_consistent_with_position(self):
        for v in range(1, 6):
            k = PI.index(v)
            cell = PI.cells()[k - 1]
            assert PI.position(v) == PI.position(cell[0])


class TestIndividualize:
    def test_first_cell(self):
        pi = OrderedPartition([[4, 5, 6], [1, 2, 3]], 6)
        assert pi.individualize(4).cells() == ((4,), (5, 6), (1, 2, 3))

    def test_last_cell(self):
        assert PI.individualize(1).cells() == ((2, 3), (5,), (1,), (4,))

    def test_two_cell(self):
        pi = OrderedPartition([[1, 2]], 2)
        assert pi.individualize(2).cells() == ((2,), (1,))

    def test_singleton_rejected(self):
        with pytest.raises(ValueError):
            PI.individualize(5)

    def test_position_shift(self):
        pi = OrderedPartition([[4, 5, 6], [1, 2, 3]], 6)
        after = pi.individualize(5)
        assert after.position(5) == 1
        for v in (4, 6):
            assert after.position(v) == pi.position(v) + 1
        for v in (1, 2, 3):
            assert after.position(v) == pi.position(v)


class TestIsFiner:
    def test_individualize_is_finer(self):
        assert is_finer(PI.individualize(2), PI)

    def test_reflexive(self):
        assert is_finer(PI, PI)

    def test_swapped_singletons(self):
        a = OrderedPartition([[1], [2]], 2)
        b = OrderedPartition([[2], [1]], 2)
        assert not is_finer(a, b)
        assert not is_finer(b, a)

    def test_mismatched_n(self):
        with pytest.raises(ValueError):
            is_finer(OrderedPartition.unit(3), OrderedPartition.unit(4))


class TestApplyPermutation:
    def test_complete_graph_fixed(self):
        k3 = ColoredGraph(3, [(1, 2), (2, 3), (1, 3)])
        g = apply_permutation(k3, Permutation([2, 3, 1]))
        assert g.edges == k3.edges

    def test_identity(self):
        p3 = ColoredGraph(3, [(1, 2), (2, 3)])
        assert apply_permutation(p3, Permutation.identity(3)) == p3

    def test_path_reversal(self):
        p3 = ColoredGraph(3, [(1, 2), (2, 3)])
        g = apply_permutation(p3, Permutation([3, 2, 1]))
        assert g.edges == p3.edges

    def test_cells_map_setwise(self):
        g = ColoredGraph(3, [(1, 2)], OrderedPartition([[1, 2], [3]], 3))
        h = apply_permutation(g, Permutation([3, 2, 1]))
        assert h.coloring.cells() == ((2, 3), (1,))


class TestIsAutomorphism:
    def test_fig_example(self):
        assert is_automorphism(fig_graph(), Permutation.from_cycles("(2 3)(5 6)", 6))

    def test_identity(self):
        assert is_automorphism(fig_graph(), Permutation.identity(6))

    def test_path_swap_rejected(self):
        p3 = ColoredGraph(3, [(1, 2), (2, 3)])
        assert not is_automorphism(p3, Permutation([2, 1, 3]))

    def test_color_violation_rejected(self):
        g = ColoredGraph(2, [], OrderedPartition([[1], [2]], 2))
        assert not is_automorphism(g, Permutation([2, 1]))


class TestPermutation:
    def test_roundtrip_cycles(self):
        p = Permutation.from_cycles("(1 2)(5 6)", 6)
        assert p.cycles() == "(1 2)(5 6)"
        assert Permutation.from_cycles(p.cycles(), 6) == p

    def test_identity_prints_empty(self):
        assert Permutation.identity(4).cycles() == "()"

    def test_compose_order(self):
        p = Permutation([2, 1, 3])
        q = Permutation([1, 3, 2])
        assert (p * q)(3) == p(q(3))

    def test_inverse(self):
        p = Permutation([3, 1, 2])
        assert (p * p.inverse()).is_identity()

    def test_rejects_non_bijection(self):
        with pytest.raises(ValueError):
            Permutation([1, 1, 2])


class TestPartitionValidation:
    def test_rejects_overlap(self):
        with pytest.raises(ValueError):
            OrderedPartition([[1, 2], [2, 3]], 3)

    def test_rejects_gap(self):
        with pytest.raises(ValueError):
            OrderedPartition([[1], [3]], 3)

    def test_rejects_empty_cell(self):
        with pytest.raises(ValueError):
            OrderedPartition([[1, 2], []], 2)

    def test_equality_ignores_within_cell_order(self):
        assert OrderedPartition([[3, 1], [2]], 3) == OrderedPartition([[1, 3], [2]], 3)


class TestGraphValidation:
    def test_rejects_loop(self):
        with pytest.raises(ValueError):
            ColoredGraph(2, [(1, 1)])

    def test_rejects_duplicate(self):
        with pytest.raises(ValueError):
            ColoredGraph(2, [(1, 2), (2, 1)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            ColoredGraph(2, [(1, 3)])


@st.composite
def random_graph(draw, max_n=8):
    n = draw(st.integers(min_value=2, max_value=max_n))
    pairs = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [e for e, keep in zip(pairs, mask) if keep]
    return ColoredGraph(n, edges)


@st.composite
def random_perm(draw, n):
    images = draw(st.permutations(list(range(1, n + 1))))
    return Permutation(images)


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_individualize_shifts_only_cellmates(self, data):
        g = data.draw(random_graph())
        n = g.n
        half = list(range(1, n // 2 + 1)) or [1]
        rest = [v for v in range(1, n + 1) if v not in half]
        cells = [half] + ([rest] if rest else [])
        pi = OrderedPartition(cells, n)
        candidates = [w for w in range(1, n + 1) if len(pi.cell_of(w)) > 1]
        assume(candidates)
        v = data.draw(st.sampled_from(candidates))
        after = pi.individualize(v)
        assert is_finer(after, pi)
        moved = {w for w in range(1, n + 1)
                 if after.position(w) != pi.position(w)}
        cell = set(pi.cell_of(v)) - {v}
        assert moved == cell
        for w in moved:
            assert after.position(w) == pi.position(w) + 1

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_automorphisms_closed_under_composition(self, data):
        g = data.draw(random_graph(max_n=6))
        p = data.draw(random_perm(g.n))
        q = data.draw(random_perm(g.n))
        if is_automorphism(g, p) and is_automorphism(g, q):
            assert is_automorphism(g, p * q)

    @settings(max_examples=40, deadline=None)
    @given(st.data())
    def test_apply_preserves_structure(self, data):
        g = data.draw(random_graph())
        p = data.draw(random_perm(g.n))
        h = apply_permutation(g, p)
        assert h.m == g.m
        assert sorted(len(c) for c in h.coloring.cells()) == \
            sorted(len(c) for c in g.coloring.cells())
