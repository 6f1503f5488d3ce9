from collections import Counter

import networkx as nx
import numpy as np
import pytest

from core.exceptions import GraphError, SamplingError
from core.graphs import FiniteGraph, WindowedGraph, build_grid_window
from core.group import lattice
from services.tree_sampler import (
    END_1,
    END_2,
    SpanningTreeWithEnds,
    finite_root,
    finite_subtree,
    infinite_neighbours,
    rooted_tree,
    subtree_height,
    tree_from_json,
    tree_to_json,
    trunk_double_ray,
    two_ended_tree,
    wilson_wired_ust,
)


class TestWilsonWiredUst:

    def test_single_vertex_is_forced(self, rng):
        g = nx.Graph()
        g.add_node(lattice(0, 0))
        window = WindowedGraph(FiniteGraph(g, 2), frozenset([lattice(0, 0)]), 0, 0, {lattice(0, 0): 4})
        T = wilson_wired_ust(window, rng)
        assert set(T.tree.edges) in ({(lattice(0, 0), END_1)}, {(END_1, lattice(0, 0))})

    def test_spans_window(self, small_window, wired_tree):
        assert wired_tree.window_vertices == small_window.vertices
        assert nx.is_tree(wired_tree.tree)
        assert wired_tree.ends == (END_1,)
        assert wired_tree.tree.number_of_edges() == len(small_window.vertices)

    def test_single_escape_direction(self, wired_tree):
        assert all(len(infinite_neighbours(wired_tree, v)) == 1 for v in wired_tree.window_vertices)

    def test_same_seed_same_tree(self, small_window):
        first = wilson_wired_ust(small_window, np.random.default_rng(5))
        second = wilson_wired_ust(small_window, np.random.default_rng(5))
        assert tree_to_json(first) == tree_to_json(second)

    def test_two_vertex_path_is_uniform(self):
        g = nx.Graph([(lattice(0), lattice(1))])
        window = WindowedGraph(FiniteGraph(g, 1), frozenset(g.nodes), 0, 1, {lattice(0): 1, lattice(1): 1})
        rng = np.random.default_rng(2024)
        n = 4000
        counts = Counter()
        for _ in range(n):
            T = wilson_wired_ust(window, rng)
            counts[T.tree.has_edge(lattice(0), lattice(1))] += 1
        # three wired trees: 0-1 with either wire, or both wires
        p = 2 / 3
        assert abs(counts[True] / n - p) < 4 * np.sqrt(p * (1 - p) / n)

    def test_no_frontier(self, rng):
        window = WindowedGraph(FiniteGraph(nx.path_graph(3)))
        with pytest.raises(SamplingError):
            wilson_wired_ust(window, rng)

    def test_disconnected_window(self, rng):
        g = nx.Graph([(lattice(0), lattice(1)), (lattice(3), lattice(4))])
        window = WindowedGraph(FiniteGraph(g, 1), frozenset([lattice(0), lattice(4)]))
        with pytest.raises(SamplingError):
            wilson_wired_ust(window, rng)


class TestTwoEndedTree:

    def test_trunk_is_axis(self, trunk_tree):
        expected = {(lattice(x, 0), lattice(x + 1, 0)) for x in range(-6, 6)}
        assert trunk_double_ray(trunk_tree).edges == expected

    def test_vertical_axis(self, small_window, rng):
        T = two_ended_tree(small_window, 1, rng)
        assert trunk_double_ray(T).edges == {(lattice(0, y), lattice(0, y + 1)) for y in range(-6, 6)}

    def test_one_dimensional_window_is_forced(self, rng):
        window = build_grid_window(1, 3, 0)
        T = two_ended_tree(window, 0, rng)
        assert T.tree.number_of_edges() == 8
        assert T.tree.has_edge(END_1, lattice(-3))
        assert T.tree.has_edge(END_2, lattice(3))

    def test_trunk_vertices_see_both_ends(self, trunk_tree):
        v = lattice(0, 0)
        assert set(infinite_neighbours(trunk_tree, v)) == {lattice(-1, 0), lattice(1, 0)}

    def test_axis_outside_window(self, small_window, rng):
        with pytest.raises(SamplingError):
            two_ended_tree(small_window, 2, rng)


class TestFiniteSubtree:

    def test_nested(self, wired_tree):
        for v in wired_tree.window_vertices:
            S = finite_subtree(wired_tree, v)
            assert all(finite_subtree(wired_tree, u) <= S for u in S)

    def test_heights_decrease(self, wired_tree):
        for v in wired_tree.window_vertices:
            for u in finite_subtree(wired_tree, v) - {v}:
                assert subtree_height(wired_tree, u) < subtree_height(wired_tree, v)

    def test_leaf(self, wired_tree):
        leaf = next(v for v in wired_tree.window_vertices if wired_tree.tree.degree(v) == 1)
        assert finite_subtree(wired_tree, leaf) == {leaf}
        assert subtree_height(wired_tree, leaf) == 0

    def test_finite_root_contains_vertex(self, trunk_tree):
        for v in trunk_tree.window_vertices:
            assert v in finite_subtree(trunk_tree, finite_root(trunk_tree, v))

    def test_unknown_vertex(self, wired_tree):
        with pytest.raises(GraphError):
            finite_subtree(wired_tree, lattice(50, 50))

    def test_pendant_leaf_height(self):
        T = rooted_tree(nx.path_graph(3), 0)
        assert subtree_height(T, 1) == 1
        assert finite_subtree(T, 1) == {1, 2}


class TestSpanningTreeValidation:

    def test_cycle_rejected(self):
        with pytest.raises(SamplingError):
            SpanningTreeWithEnds(nx.cycle_graph(4), (), 0)

    def test_end_must_be_root(self):
        tree = nx.Graph([(END_1, 0), (0, 1)])
        with pytest.raises(SamplingError):
            SpanningTreeWithEnds(tree, (END_1,), 0)


class TestTreeJson:

    def test_two_ended_tree_reloads(self, trunk_tree):
        doc = tree_to_json(trunk_tree)
        assert doc["ends"] == ["∂1", "∂2"]
        reloaded = tree_from_json(doc, 2)
        assert tree_to_json(reloaded) == doc
        assert trunk_double_ray(reloaded) == trunk_double_ray(trunk_tree)
