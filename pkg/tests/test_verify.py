import networkx as nx
import pytest
from pydantic import ValidationError

from core.exceptions import GraphError, SearchExhaustedError
from core.graphs import EdgeSet, FiniteGraph
from core.group import lattice
from models import CheckReport
from services.cube_ray import OrderAssignment, phi_edges, sample_orders
from services.tiling import (
    Tile,
    TwoColouring,
    base_colouring,
    tiles_in_window,
    tiling_colouring,
    tile_graph_window,
)
from services.tree_sampler import finite_root, rooted_tree, trunk_double_ray, wilson_wired_ust
from services.verify import (
    brute_force_hamiltonian,
    check_acyclic,
    check_connected_spanning,
    check_degree_preservation,
    check_hamilton_cycle,
    check_internal_edge_coverage,
    check_internal_edges_on_path,
    check_no_rule_iii_inside,
    check_power_bound,
    check_subpath_property,
    check_trunk_connections,
    check_two_regular,
    to_jsonable,
)


def cycle_edges(n: int, offset: int = 0) -> EdgeSet:
    return EdgeSet.from_pairs((offset + i, offset + (i + 1) % n) for i in range(n))


class TestCheckReport:

    def test_failing_report_needs_witness(self):
        with pytest.raises(ValidationError):
            CheckReport(name="two_regular", passed=False)

    def test_group_elements_become_lists(self):
        assert to_jsonable({"v": lattice(1, -2), "s": {lattice(0, 0)}}) == {"v": [1, -2], "s": [[0, 0]]}


class TestStructuralChecks:

    def test_two_regular(self):
        E = EdgeSet.from_pairs([(0, 1), (1, 2)])
        assert check_two_regular(E, [1]).passed
        failed = check_two_regular(E, [0, 1])
        assert not failed.passed
        assert failed.witness == {"vertex": 0, "degree": 1}

    def test_connected_spanning_two_cycles(self):
        E = cycle_edges(3).union(cycle_edges(3, offset=3))
        G = FiniteGraph(nx.complete_graph(6))
        report = check_connected_spanning(E, G, range(6))
        assert not report.passed
        assert report.witness == {"stranded": 3}

    def test_connected_through_the_boundary(self):
        E = EdgeSet.from_pairs([(0, 1), (1, 2), (3, 4)])
        G = FiniteGraph(nx.path_graph(5))
        assert check_connected_spanning(E, G, [1, 4]).passed
        assert not check_connected_spanning(E, G, [1, 3, 4]).passed

    def test_uncovered_vertex(self):
        E = EdgeSet.from_pairs([(0, 1)])
        report = check_connected_spanning(E, FiniteGraph(nx.path_graph(3)), [0, 1, 2])
        assert report.witness == {"uncovered": 2}

    def test_acyclic(self):
        assert check_acyclic(EdgeSet.from_pairs([(0, 1), (1, 2)]), [0, 1, 2]).passed
        report = check_acyclic(cycle_edges(4), range(4))
        assert not report.passed
        assert sorted(report.witness["cycle"]) == [0, 1, 2, 3]
        assert check_acyclic(cycle_edges(4), range(4), expected_cycles=1).passed

    def test_power_bound(self):
        G = FiniteGraph(nx.path_graph(5))
        E = EdgeSet.from_pairs([(0, 3)])
        assert check_power_bound(E, G, 3).passed
        report = check_power_bound(E, G, 2)
        assert report.witness == {"edge": [0, 3]}


class TestHamiltonChecks:

    def test_cycle_passes(self):
        G = FiniteGraph(nx.cycle_graph(5))
        assert all(r.passed for r in check_hamilton_cycle(cycle_edges(5), G, k=1))

    def test_path_fails(self):
        G = FiniteGraph(nx.path_graph(4))
        names = [r.name for r in check_hamilton_cycle(EdgeSet.from_pairs([(0, 1), (1, 2), (2, 3)]), G) if not r.passed]
        assert names == ["two_regular", "acyclic"]

    def test_oracle(self):
        assert brute_force_hamiltonian(FiniteGraph(nx.complete_graph(4)))
        assert not brute_force_hamiltonian(FiniteGraph(nx.star_graph(3)))
        assert not brute_force_hamiltonian(FiniteGraph(nx.path_graph(2)))

    def test_oracle_is_capped(self):
        with pytest.raises(SearchExhaustedError):
            brute_force_hamiltonian(FiniteGraph(nx.cycle_graph(13)))


class TestCubeChecks:

    def test_subpath_property_on_path_of_three(self, rng):
        G = FiniteGraph(nx.path_graph(3))
        T = rooted_tree(G.graph, 0)
        orders = sample_orders(G, rng)
        phi = phi_edges(T, orders, G)
        for v in (0, 1, 2):
            assert check_subpath_property(T, orders, phi.edges, v).passed

    def test_subpath_property_flags_a_missing_edge(self, rng):
        G = FiniteGraph(nx.path_graph(3))
        T = rooted_tree(G.graph, 0)
        orders = sample_orders(G, rng)
        report = check_subpath_property(T, orders, EdgeSet.from_pairs([(0, 2)]), 0)
        assert not report.passed

    def test_trunk_checks_on_a_sample(self, trunk_tree, small_window, rng):
        phi = phi_edges(trunk_tree, sample_orders(small_window, rng), small_window)
        assert check_no_rule_iii_inside(trunk_tree, phi).passed
        report = check_trunk_connections(trunk_tree, phi)
        assert report.passed
        assert report.details["trunk_edges"] == len(trunk_double_ray(trunk_tree))

    def test_subpaths_in_a_wired_sample(self, wired_tree, small_window, rng):
        orders = sample_orders(small_window, rng)
        phi = phi_edges(wired_tree, orders, small_window)
        roots = {finite_root(wired_tree, v) for v in small_window.interior}
        for v in sorted(roots)[:10]:
            assert check_subpath_property(wired_tree, orders, phi.edges, v).passed

    def test_order_lookup_outside_assignment(self):
        with pytest.raises(GraphError):
            OrderAssignment({}).rank(0, 1)


class TestTilingChecks:

    def test_swaps_preserve_degrees(self, tiling_window, rng):
        tree = wilson_wired_ust(tile_graph_window(tiling_window), rng)
        before = base_colouring(tiles_in_window(tiling_window))
        after = tiling_colouring(tree, tiling_window)
        assert check_degree_preservation(before, after).passed

    def test_recoloured_edge_changes_degrees(self, tiling_window):
        before = base_colouring(tiles_in_window(tiling_window))
        e = sorted(before.colours)[0]
        tampered = TwoColouring({**before.colours, e: before.colours[e].other()})
        report = check_degree_preservation(before, tampered)
        assert not report.passed
        assert report.witness["vertex"] in [u.to_json() for u in e]

    def test_leaf_tile_internal_edges(self, tiling_sample):
        tree = tiling_sample.tile_tree
        leaf = next(v for v in tree.window_vertices if tree.tree.degree(v) == 1)
        report = check_internal_edges_on_path(tree, tiling_sample.colouring, leaf)
        assert report.passed
        assert report.details["tiles"] == 1

    def test_unswapped_tile_is_an_eight_cycle(self, tiling_sample):
        tree = tiling_sample.tile_tree
        leaf = next(v for v in tree.window_vertices if tree.tree.degree(v) == 1)
        colouring = base_colouring([Tile.at(leaf)])
        for colour in colouring.classes():
            H = colour.to_graph()
            assert H.number_of_edges() == H.number_of_nodes() == 8
        assert check_internal_edges_on_path(tree, colouring, leaf).passed

    def test_coverage_without_tiles(self, tiling_sample):
        report = check_internal_edge_coverage(tiling_sample.colouring, [], [lattice(0, 0)])
        assert not report.passed
        assert report.witness == {"vertex": [0, 0], "colour": "solid"}
