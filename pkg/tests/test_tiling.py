from collections import Counter

import networkx as nx
import numpy as np
import pytest

from core.exceptions import TilingError
from core.graphs import build_grid_window, edge_key
from core.group import lattice
from services.tiling import (
    Colour,
    Tile,
    attachment,
    attachment_squares,
    base_colouring,
    choose_coset,
    controlling_tile_edge,
    coset_key,
    coset_representatives,
    in_tile_lattice,
    internal_edges,
    randomize_coset,
    sample_tiling,
    swap_at_squares,
    tile_base_of,
    tile_graph_window,
    tile_template,
    tiles_in_window,
    tiling_colouring,
    tiling_double_rays,
)
from services.tree_sampler import wilson_wired_ust


class TestTileTemplate:

    def test_template_edges(self):
        solid, dotted = tile_template()
        assert (lattice(-1, 0), lattice(0, 0)) in solid
        assert (lattice(-2, 1), lattice(-2, 2)) in dotted

    def test_each_class_is_an_eight_cycle(self):
        for part in tile_template():
            g = part.to_graph()
            assert len(part) == 8
            assert nx.is_connected(g)
            assert all(d == 2 for _, d in g.degree)

    def test_classes_disjoint(self):
        solid, dotted = tile_template()
        assert not solid.edges & dotted.edges


class TestTilesInWindow:

    def test_interior_edges_covered_once(self):
        window = build_grid_window(2, 10, 2)
        tiles = tiles_in_window(window)
        owner = {}
        for t in tiles:
            for e in t.edges:
                assert e not in owner
                owner[e] = t.base
        for u, v in window.graph.edge_set().edges:
            if u in window.interior and v in window.interior:
                assert edge_key(u, v) in owner

    def test_edge_in_translated_dotted_class(self):
        t = Tile.at(lattice(2, -2))
        assert t.colour_of(lattice(0, 0), lattice(1, 0)) is Colour.DOTTED
        assert tile_base_of(lattice(0, 0), lattice(1, 0)) == lattice(2, -2)

    def test_bases_lie_on_tile_lattice(self, tiling_window):
        assert all(in_tile_lattice(t.base) for t in tiles_in_window(tiling_window))

    def test_non_lattice_base_rejected(self):
        with pytest.raises(TilingError):
            Tile(lattice(1, 0), *tile_template())


class TestAttachment:

    def test_worked_square(self):
        square = attachment(Tile.at(lattice(0, 0)), Tile.at(lattice(2, 2)))
        assert set(square.vertices) == {lattice(0, 3), lattice(1, 2)}
        corners = {lattice(0, 2), lattice(1, 2), lattice(1, 3), lattice(0, 3)}
        assert square.edges.vertices == corners
        assert len(square.edges) == 4

    def test_symmetric(self):
        a, b = Tile.at(lattice(0, 0)), Tile.at(lattice(2, -2))
        assert attachment(a, b) == attachment(b, a)

    def test_non_adjacent(self):
        with pytest.raises(TilingError):
            attachment(Tile.at(lattice(0, 0)), Tile.at(lattice(4, 0)))

    def test_four_squares_and_four_internal_edges_per_colour(self):
        t = Tile.at(lattice(0, 0))
        assert len(attachment_squares(t)) == 4
        internal = internal_edges(t)
        assert len(internal[Colour.SOLID]) == 4
        assert len(internal[Colour.DOTTED]) == 4


class TestColouring:

    def test_base_colouring_is_tile_lattice_invariant(self, tiling_window):
        c = base_colouring(tiles_in_window(tiling_window))
        shift = lattice(2, 2)
        for (u, v), colour in c.colours.items():
            moved = edge_key(u + shift, v + shift)
            if moved in c.colours:
                assert c.colours[moved] is colour

    def test_empty_swap(self, tiling_window):
        c = base_colouring(tiles_in_window(tiling_window))
        assert swap_at_squares(c, []) == c

    def test_swap_is_an_involution(self, tiling_window):
        c = base_colouring(tiles_in_window(tiling_window))
        square = attachment(Tile.at(lattice(0, 0)), Tile.at(lattice(2, 2)))
        once = swap_at_squares(c, [square])
        assert once != c
        assert swap_at_squares(once, [square]) == c

    def test_overlapping_squares_rejected(self, tiling_window):
        c = base_colouring(tiles_in_window(tiling_window))
        square = attachment(Tile.at(lattice(0, 0)), Tile.at(lattice(2, 2)))
        with pytest.raises(TilingError):
            swap_at_squares(c, [square, square])

    def test_single_swap_joins_two_solid_cycles(self):
        a, b = Tile.at(lattice(0, 0)), Tile.at(lattice(2, 2))
        c = swap_at_squares(base_colouring([a, b]), [attachment(a, b)])
        union = a.edges | b.edges
        solid = nx.Graph([e for e in union if c.colours[e] is Colour.SOLID])
        assert solid.number_of_edges() == 16
        assert nx.is_connected(solid)
        assert all(d == 2 for _, d in solid.degree)

    def test_controlling_edge_decides_colour(self, tiling_window, rng):
        tile_window = tile_graph_window(tiling_window)
        tree = wilson_wired_ust(tile_window, rng)
        c = tiling_colouring(tree, tiling_window)
        tree_edges = tree.window_edges().edges
        for (u, v), colour in c.colours.items():
            template = Tile.at(tile_base_of(u, v)).colour_of(u, v)
            control = controlling_tile_edge(u, v)
            swapped = control is not None and edge_key(*control) in tree_edges
            assert colour is (template.other() if swapped else template)

    def test_uncovered_tree_rejected(self, tiling_window, small_window, rng):
        tree = wilson_wired_ust(tile_graph_window(small_window), rng)
        with pytest.raises(TilingError):
            tiling_colouring(tree, tiling_window)


class TestTilingDoubleRays:

    def test_classes_partition_tiled_edges(self, tiling_window, rng):
        tree = wilson_wired_ust(tile_graph_window(tiling_window), rng)
        solid, dotted = tiling_double_rays(tree, tiling_window)
        tiled = {e for t in tiles_in_window(tiling_window) for e in t.edges}
        assert not solid.edges & dotted.edges
        assert solid.edges | dotted.edges == tiled

    def test_trusted_vertices_have_degree_two(self, tiling_sample):
        for E in (tiling_sample.solid, tiling_sample.dotted):
            assert all(E.degree(v) == 2 for v in tiling_sample.trusted)

    def test_unaveraged_sample_has_no_shift(self, tiling_window, rng):
        sample = sample_tiling(tiling_window, rng, averaged=False)
        assert sample.shift == lattice(0, 0)


class TestCosets:

    def test_eight_representatives(self):
        reps = coset_representatives()
        assert len(reps) == 8
        assert len({coset_key(g) for g in reps}) == 8
        assert reps[0] == lattice(0, 0)

    def test_two_zero_and_zero_two_share_a_coset(self):
        assert coset_key(lattice(2, 0)) == coset_key(lattice(0, 2))

    def test_identity_representative_leaves_sample(self, tiling_sample):
        class Zero:
            def integers(self, n):
                return 0

        moved = randomize_coset((tiling_sample.solid,), Zero())
        assert moved[0].edges == tiling_sample.solid.edges

    def test_every_coset_is_chosen(self):
        rng = np.random.default_rng(9)
        counts = Counter(choose_coset(rng) for _ in range(800))
        assert set(counts) == set(coset_representatives())
        assert all(abs(n - 100) < 4 * np.sqrt(800 * (1 / 8) * (7 / 8)) for n in counts.values())
