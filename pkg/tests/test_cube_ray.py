from collections import Counter

import networkx as nx
import numpy as np
import pytest

from core.exceptions import ConfigurationError, GraphError
from core.graphs import FiniteGraph, build_grid_window, edge_key
from core.group import lattice
from services.cube_ray import (
    ChildEnumeration,
    OrderAssignment,
    RuleTag,
    child_order_assignments,
    dagger,
    finite_hamilton_cycle,
    kth_child,
    phi_edges,
    sample_cube,
    sample_orders,
)
from services.tree_sampler import END_1, END_2, SpanningTreeWithEnds, rooted_tree, trunk_double_ray, two_ended_tree
from services.verify import check_acyclic, check_hamilton_cycle, check_power_bound, check_two_regular


def star_orders(leaves):
    """Orders of the star K1,3 with the centre's neighbours listed as given."""
    orders = {0: tuple(leaves)}
    orders.update({leaf: (0,) for leaf in (1, 2, 3)})
    return OrderAssignment(orders)


class TestSampleOrders:

    def test_orders_are_permutations(self, small_window, rng):
        orders = sample_orders(small_window, rng)
        orders.validate(small_window)

    def test_degree_one_vertex(self, rng):
        orders = sample_orders(FiniteGraph(nx.path_graph(2)), rng)
        assert orders.orders == {0: (1,), 1: (0,)}

    def test_degree_three_orders_are_uniform(self):
        G = FiniteGraph(nx.star_graph(3))
        rng = np.random.default_rng(77)
        n = 6000
        counts = Counter(sample_orders(G, rng).orders[0] for _ in range(n))
        assert len(counts) == 6
        assert all(abs(c / n - 1 / 6) < 0.02 for c in counts.values())

    def test_json(self, rng):
        orders = sample_orders(FiniteGraph(nx.cycle_graph(5)), rng)
        assert OrderAssignment.from_json(orders.to_json()).orders == orders.orders

    def test_bad_order_rejected(self):
        with pytest.raises(ConfigurationError):
            star_orders((1, 2)).validate(FiniteGraph(nx.star_graph(3)))


class TestChildren:

    def test_kth_child_walks_the_order(self):
        T = rooted_tree(nx.star_graph(3), 0)
        orders = star_orders((2, 3, 1))
        assert [kth_child(T, orders, 0, i) for i in (1, 2, 3)] == [2, 3, 1]
        descending = [kth_child(T, orders, 0, i, ChildEnumeration.DESCENDING) for i in (1, 2, 3)]
        assert descending == [1, 3, 2]

    def test_kth_child_out_of_range(self):
        T = rooted_tree(nx.star_graph(3), 0)
        with pytest.raises(ConfigurationError):
            kth_child(T, star_orders((1, 2, 3)), 0, 4)
        with pytest.raises(ConfigurationError):
            kth_child(T, star_orders((1, 2, 3)), 1, 1)

    def test_dagger(self):
        T = rooted_tree(nx.star_graph(3), 0)
        orders = star_orders((2, 3, 1))
        assert dagger(T, orders, 0) == 1
        assert dagger(T, orders, 2) == 2

    def test_single_child_dagger(self):
        T = rooted_tree(nx.path_graph(3), 0)
        orders = sample_orders(FiniteGraph(nx.path_graph(3)), np.random.default_rng(0))
        assert dagger(T, orders, 1) == 2
        assert kth_child(T, orders, 1, 1) == 2


class TestPhiEdges:

    def test_path_of_three(self, rng):
        G = FiniteGraph(nx.path_graph(3))
        T = rooted_tree(G.graph, 0)
        phi = phi_edges(T, sample_orders(G, rng), G)
        assert phi.edges.edges == {(0, 2), (1, 2)}
        assert phi.tags == {(0, 2): RuleTag.CHILD, (1, 2): RuleTag.CHILD}

    def test_sibling_rule(self):
        T = rooted_tree(nx.star_graph(3), 0)
        phi = phi_edges(T, star_orders((1, 2, 3)))
        assert phi.edges_with(RuleTag.CHILD) == [(0, 1)]
        assert phi.edges_with(RuleTag.SIBLING) == [(1, 2), (2, 3)]

    def test_tree_edge_outside_graph(self, rng):
        G = FiniteGraph(nx.path_graph(3))
        T = rooted_tree(nx.Graph([(0, 2), (2, 1)]), 0)
        with pytest.raises(GraphError):
            phi_edges(T, sample_orders(G, rng), G)

    def test_line_maps_to_itself(self, rng):
        window = build_grid_window(1, 5, 0)
        T = two_ended_tree(window, 0, rng)
        phi = phi_edges(T, sample_orders(window, rng), window)
        assert phi.edges.edges == trunk_double_ray(T).edges
        assert all(tag.value.startswith("iii") for tag in phi.tags.values())
        assert phi.boundary_affected == {lattice(-5), lattice(5)}

    def test_star_off_a_trunk_vertex(self):
        # trunk 0..6 with the leaves 10, 11, 12 hanging off 3
        g = nx.path_graph(7)
        g.add_edges_from((3, leaf) for leaf in (10, 11, 12))
        G = FiniteGraph(g)
        tree = nx.Graph(g)
        tree.add_edges_from([(END_1, 0), (END_2, 6)])
        T = SpanningTreeWithEnds(tree, (END_1, END_2), END_1)
        assert T.finite_children(3) == (10, 11, 12)
        seen = 0
        for orders in child_order_assignments(G, T):
            phi = phi_edges(T, orders, G)
            assert check_two_regular(phi.edges, [2, 3, 4, 10, 11, 12]).passed
            assert check_power_bound(phi.edges, G, 3).passed
            seen += 1
        assert seen == 6


class TestFiniteHamiltonCycle:

    def test_path_of_three(self, rng):
        G = FiniteGraph(nx.path_graph(3))
        cycle = finite_hamilton_cycle(G, G.graph, sample_orders(G, rng), root=0)
        assert cycle.edges == {(0, 1), (0, 2), (1, 2)}

    def test_star_ascending(self):
        G = FiniteGraph(nx.star_graph(3))
        T = rooted_tree(G.graph, 0)
        for orders in child_order_assignments(G, T):
            cycle = finite_hamilton_cycle(G, T, orders)
            assert all(r.passed for r in check_hamilton_cycle(cycle, G))

    def test_star_descending_breaks(self):
        G = FiniteGraph(nx.star_graph(3))
        T = rooted_tree(G.graph, 0)
        cycle = finite_hamilton_cycle(G, T, star_orders((1, 2, 3)), enumeration=ChildEnumeration.DESCENDING)
        # the closing edge coincides with the first rule edge
        assert len(cycle) == 3
        assert not check_two_regular(cycle, G.vertices).passed

    def test_single_child_chain(self, rng):
        G = FiniteGraph(nx.path_graph(6))
        cycle = finite_hamilton_cycle(G, G.graph, sample_orders(G, rng), root=0)
        assert all(r.passed for r in check_hamilton_cycle(cycle, G))
        assert edge_key(0, 1) in cycle

    def test_random_trees_of_small_graphs(self):
        rng = np.random.default_rng(3)
        for G in (nx.petersen_graph(), nx.complete_graph(5), nx.grid_2d_graph(3, 3)):
            F = FiniteGraph(G)
            for u, v in G.edges:
                G.edges[u, v]["weight"] = float(rng.random())
            T = nx.minimum_spanning_tree(G)
            cycle = finite_hamilton_cycle(F, T, sample_orders(F, rng), root=F.vertices[0])
            assert all(r.passed for r in check_hamilton_cycle(cycle, F))

    def test_too_small(self, rng):
        G = FiniteGraph(nx.path_graph(2))
        with pytest.raises(GraphError):
            finite_hamilton_cycle(G, G.graph, sample_orders(G, rng), root=0)

    def test_unrooted_tree_needs_root(self, rng):
        G = FiniteGraph(nx.path_graph(3))
        with pytest.raises(ConfigurationError):
            finite_hamilton_cycle(G, G.graph, sample_orders(G, rng))

    def test_tree_must_span(self, rng):
        G = FiniteGraph(nx.path_graph(4))
        with pytest.raises(GraphError):
            finite_hamilton_cycle(G, nx.path_graph(3), sample_orders(G, rng), root=0)


class TestSampleCube:

    @pytest.mark.parametrize("ends", [1, 2])
    def test_trusted_region_is_a_ray(self, small_window, ends):
        sample = sample_cube(small_window, ends, np.random.default_rng(11))
        assert sample.trusted
        assert check_two_regular(sample.edges, sample.trusted).passed
        assert check_acyclic(sample.edges, sample.trusted).passed
        assert check_power_bound(sample.edges, small_window, 3).passed

    def test_one_end_never_uses_trunk_rule(self, small_window, rng):
        sample = sample_cube(small_window, 1, rng)
        assert not sample.phi.edges_with(RuleTag.TRUNK_BOTH, RuleTag.TRUNK_ONE, RuleTag.TRUNK_NEITHER)

    def test_bad_end_count(self, small_window, rng):
        with pytest.raises(ConfigurationError):
            sample_cube(small_window, 3, rng)

    def test_same_seed_same_edges(self, small_window):
        first = sample_cube(small_window, 2, np.random.default_rng(4))
        second = sample_cube(small_window, 2, np.random.default_rng(4))
        assert first.edges == second.edges
