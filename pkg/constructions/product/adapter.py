import logging
from typing import Dict, List

import numpy as np

from core.construction_interface import ConstructionInterface
from core.graphs import build_grid_window, edge_set_from_json, vertex_to_json, vertices_from_json
from models import CheckReport
from services.abelian import RaySample, level_spanning_copy, product_ray_zd
from services.render import lattice_svg
from services.verify import (
    check_acyclic,
    check_connected_spanning,
    check_power_bound,
    check_spanning_copy,
    check_two_regular,
    to_jsonable,
)


logger = logging.getLogger(__name__)


class ProductConstruction(ConstructionInterface):
    """Double ray of Z^d, d >= 3, lifted from plane tiling rays one coordinate at a time."""

    def sample(self, config, rng: np.random.Generator) -> RaySample:
        return product_ray_zd(config.dimension, rng, config.radius, config.margin)

    def verify(self, sample: RaySample, config) -> List[CheckReport]:
        E, trusted = sample.edges, sample.trusted
        reports = [
            check_two_regular(E, trusted),
            check_connected_spanning(E, sample.window, trusted),
            check_acyclic(E, trusted),
            check_power_bound(E, sample.window, 1),
        ]
        if sample.spanning_copy is not None:
            reports.append(check_spanning_copy(sample.spanning_copy, sample.window, trusted, sample.window.dimension))
        return reports

    def to_json(self, sample: RaySample) -> Dict:
        doc = {
            "dimension": sample.window.dimension,
            "radius": sample.window.radius,
            "margin": sample.window.margin,
            "edges": sample.edges.to_json(),
            "trusted": [vertex_to_json(v) for v in sorted(sample.trusted)],
            "provenance": to_jsonable(dict(sample.provenance)),
        }
        # the spanning copy is rebuilt from R12 on load
        if sample.r12 is not None:
            doc["r12"] = sample.r12.to_json()
        return doc

    def from_json(self, doc: Dict) -> RaySample:
        d = doc["dimension"]
        window = build_grid_window(d, doc["radius"], doc["margin"])
        r12 = copy = None
        if "r12" in doc:
            r12 = edge_set_from_json(doc["r12"], 2)
            copy = level_spanning_copy(r12, d, doc["radius"])
        return RaySample(
            edge_set_from_json(doc["edges"], d, vertices=window.vertices),
            vertices_from_json(doc["trusted"], d),
            window,
            doc.get("provenance", {}),
            r12=r12,
            spanning_copy=copy,
        )

    def render(self, sample: RaySample) -> Dict[str, str]:
        """The coordinate plane through the origin."""
        plane = [v for v in sample.window.vertices if not any(v.free[2:])]
        layers = {"ray": sample.edges.restrict(plane)}
        trusted = [v for v in sample.trusted if not any(v.free[2:])]
        return {"svg": lattice_svg(layers, sample.window.radius, trusted)}
