import logging
from typing import Dict, List

import numpy as np

from core.construction_interface import ConstructionInterface
from core.graphs import build_grid_window, edge_set_from_json, vertex_to_json, vertices_from_json
from core.group import element
from models import CheckReport
from services.render import lattice_svg
from services.tiling import (
    Colour,
    TilingSample,
    base_colouring,
    sample_tiling,
    shift_sample,
    tile_graph_window,
    tiles_in_window,
    tiling_colouring,
    tiling_trusted,
)
from services.tree_sampler import finite_subtree, tree_from_json, tree_to_json
from services.verify import (
    check_acyclic,
    check_connected_spanning,
    check_degree_preservation,
    check_internal_edge_coverage,
    check_internal_edges_on_path,
    check_two_regular,
    report,
)


logger = logging.getLogger(__name__)


def _subtree_roots(sample: TilingSample, count: int, max_tiles: int) -> List:
    """Evenly spaced tiles whose finite subtree is small enough to check."""
    candidates = [
        t for t in sorted(sample.tile_window.vertices)
        if len(finite_subtree(sample.tile_tree, t)) <= max_tiles
    ]
    if not candidates or count == 0:
        return []
    step = max(1, len(candidates) // count)
    return candidates[::step][:count]


class TilingConstruction(ConstructionInterface):
    """Pair of spanning double rays of Z² coloured by the tile template."""

    def sample(self, config, rng: np.random.Generator) -> TilingSample:
        window = build_grid_window(2, config.radius, config.margin)
        return sample_tiling(window, rng)

    def verify(self, sample: TilingSample, config) -> List[CheckReport]:
        window = sample.window
        tiles = tiles_in_window(window)
        reports = [check_degree_preservation(base_colouring(tiles), sample.colouring)]

        replayed = shift_sample(sample.colouring.classes(window.vertices), sample.shift, window)
        mismatch = next(
            (colour.value for colour, E in zip(Colour, replayed) if E.edges != sample.classes[colour].edges),
            None,
        )
        reports.append(report("replay_consistency", None if mismatch is None else {"colour": mismatch}))

        for colour, E in sample.classes.items():
            for r in (
                check_two_regular(E, sample.trusted),
                check_connected_spanning(E, window, sample.trusted),
                check_acyclic(E, sample.trusted),
            ):
                reports.append(r.model_copy(update={"name": f"{colour.value}.{r.name}"}))

        unshifted = tiling_trusted(window, sample.tile_window, sample.colouring)
        reports.append(check_internal_edge_coverage(sample.colouring, tiles, unshifted))

        roots = _subtree_roots(sample, config.subtrees, config.max_subtree_tiles)
        path_reports = [check_internal_edges_on_path(sample.tile_tree, sample.colouring, t) for t in roots]
        failed = [r for r in path_reports if not r.passed]
        if failed:
            reports.append(failed[0])
        else:
            reports.append(report("internal_edges_on_path", subtrees=len(path_reports)))
        return reports

    def to_json(self, sample: TilingSample) -> Dict:
        return {
            "radius": sample.window.radius,
            "margin": sample.window.margin,
            "shift": sample.shift.to_json(),
            "tile_tree": tree_to_json(sample.tile_tree),
            "solid": sample.solid.to_json(),
            "dotted": sample.dotted.to_json(),
            "trusted": [vertex_to_json(v) for v in sorted(sample.trusted)],
        }

    def from_json(self, doc: Dict) -> TilingSample:
        window = build_grid_window(2, doc["radius"], doc["margin"])
        tile_window = tile_graph_window(window)
        tree = tree_from_json(doc["tile_tree"], 2)
        colouring = tiling_colouring(tree, window)
        vertices = window.vertices
        return TilingSample(
            window,
            tile_window,
            tree,
            colouring,
            edge_set_from_json(doc["solid"], 2, vertices=vertices),
            edge_set_from_json(doc["dotted"], 2, vertices=vertices),
            vertices_from_json(doc["trusted"], 2),
            element(doc["shift"], 2),
        )

    def render(self, sample: TilingSample) -> Dict[str, str]:
        layers = {"solid": sample.solid, "dotted": sample.dotted}
        return {"svg": lattice_svg(layers, sample.window.radius, sample.trusted)}
