import json
import logging
from typing import Dict, List

import numpy as np

from core.construction_interface import ConstructionInterface
from core.exceptions import ConfigurationError
from core.graphs import build_grid_window, edge_set_from_json, graph_from_json, graph_to_json
from core.group import element
from models import CheckReport
from services.cube_ray import ChildEnumeration, CubeSample, OrderAssignment, PhiResult, phi_edges, sample_cube
from services.render import edge_set_dot, lattice_svg
from services.tree_sampler import finite_subtree, tree_from_json, tree_to_json
from services.verify import (
    check_acyclic,
    check_connected_spanning,
    check_no_rule_iii_inside,
    check_power_bound,
    check_subpath_property,
    check_trunk_connections,
    check_two_regular,
    report,
)


logger = logging.getLogger(__name__)

DOT_VERTEX_LIMIT = 400


def _load_graph(path: str):
    try:
        with open(path, "r") as f:
            return graph_from_json(json.load(f))
    except (OSError, json.JSONDecodeError, KeyError) as e:
        raise ConfigurationError(f"cannot read graph from {path}: {e}") from e


def _is_grid(sample: CubeSample) -> bool:
    return sample.window.dimension == 2 and not sample.window.moduli and sample.window.radius is not None


class CubeConstruction(ConstructionInterface):
    """Double ray of the cube of a windowed graph, by the three connection rules."""

    def sample(self, config, rng: np.random.Generator) -> CubeSample:
        if config.graph:
            window = _load_graph(config.graph)
        else:
            window = build_grid_window(2, config.radius, config.margin)
        return sample_cube(window, config.ends, rng, config.axis, config.enumeration)

    def verify(self, sample: CubeSample, config) -> List[CheckReport]:
        E, T, trusted = sample.edges, sample.tree, sample.trusted
        reports = [
            check_two_regular(E, trusted),
            check_connected_spanning(E, sample.window, trusted),
            check_acyclic(E, trusted),
            check_power_bound(E, sample.window, 3),
        ]

        checked = 0
        failure = None
        for v in sorted(trusted):
            if not finite_subtree(T, v) <= trusted:
                continue
            checked += 1
            r = check_subpath_property(T, sample.orders, E, v)
            if not r.passed:
                failure = r
                break
        reports.append(failure or report("subpath_property", subtrees=checked))

        reports.append(check_no_rule_iii_inside(T, sample.phi))
        if len(T.ends) == 2:
            reports.append(check_trunk_connections(T, sample.phi))

        replayed = phi_edges(T, sample.orders, sample.window, sample.enumeration).edges
        extra = sorted(replayed.edges ^ E.edges)
        reports.append(report("replay_consistency", {"edge": extra[0]} if extra else None))
        return reports

    def to_json(self, sample: CubeSample) -> Dict:
        window = sample.window
        doc = {
            "enumeration": sample.enumeration.value,
            "tree": tree_to_json(sample.tree),
            "orders": sample.orders.to_json(),
            "edges": sample.edges.to_json(),
            "tags": sample.phi.tags_to_json(),
        }
        if _is_grid(sample):
            doc["window"] = {"radius": window.radius, "margin": window.margin}
        else:
            doc["graph"] = graph_to_json(window)
        return doc

    def from_json(self, doc: Dict) -> CubeSample:
        if "graph" in doc:
            window = graph_from_json(doc["graph"])
        else:
            window = build_grid_window(2, doc["window"]["radius"], doc["window"]["margin"])
        dimension, moduli = window.dimension, window.moduli
        tree = tree_from_json(doc["tree"], dimension, moduli)
        orders = OrderAssignment.from_json(doc["orders"], parse=lambda x: element(x, dimension, moduli))
        orders.validate(window)
        enumeration = ChildEnumeration(doc.get("enumeration", ChildEnumeration.ASCENDING.value))

        phi = phi_edges(tree, orders, window, enumeration)
        stored = edge_set_from_json(doc["edges"], dimension, moduli, vertices=phi.edges.vertices)
        if stored.edges != phi.edges.edges:
            logger.warning("Stored edges differ from the edges the tree and orders produce")
            phi = PhiResult(stored, phi.tags, phi.trunk_sources, phi.boundary_affected, phi.daggers)
        return CubeSample(window, tree, orders, phi, enumeration)

    def render(self, sample: CubeSample) -> Dict[str, str]:
        artifacts = {}
        if _is_grid(sample):
            layers = {"tree": sample.tree.window_edges(), "ray": sample.edges}
            artifacts["svg"] = lattice_svg(layers, sample.window.radius, sample.trusted)
        if len(sample.window.vertices) <= DOT_VERTEX_LIMIT:
            labels = {e: tag.value for e, tag in sample.phi.tags.items()}
            artifacts["dot"] = edge_set_dot(sample.edges, sample.window, labels)
        return artifacts
