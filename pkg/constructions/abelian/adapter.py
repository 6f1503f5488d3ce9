import logging
from typing import Dict, List

import numpy as np

from core.construction_interface import ConstructionInterface
from core.graphs import (
    build_abelian_window,
    build_grid_window,
    edge_set_from_json,
    vertex_to_json,
    vertices_from_json,
)
from core.group import element
from models import CheckReport
from services.abelian import (
    AbelianSample,
    CoinFlip,
    CosetPath,
    RaySample,
    assemble_abelian,
    matching_split,
    sample_abelian,
)
from services.render import edge_set_dot
from services.verify import (
    check_acyclic,
    check_connected_spanning,
    check_contraction,
    check_power_bound,
    check_two_regular,
    check_unique_translate_coverage,
    to_jsonable,
)


logger = logging.getLogger(__name__)

DOT_VERTEX_LIMIT = 400


class AbelianConstruction(ConstructionInterface):
    """Double ray of Z^n x Z_m1 x ... from a free-part ray and a coset path."""

    def sample(self, config, rng: np.random.Generator) -> AbelianSample:
        return sample_abelian(config.rank, config.moduli, config.radius, config.margin, rng)

    def verify(self, sample: AbelianSample, config) -> List[CheckReport]:
        E, trusted = sample.edges, sample.trusted
        contraction = sample.contraction_map()
        return [
            check_two_regular(E, trusted),
            check_connected_spanning(E, sample.window, trusted),
            check_acyclic(E, trusted),
            check_power_bound(E, sample.window, 1),
            check_unique_translate_coverage(sample),
            check_contraction(E, contraction, sample.source.edges, {contraction[w] for w in trusted}),
        ]

    def to_json(self, sample: AbelianSample) -> Dict:
        source = sample.source
        return {
            "rank": sample.window.dimension,
            "moduli": list(sample.window.moduli),
            "radius": sample.window.radius,
            "margin": sample.window.margin,
            "edges": sample.edges.to_json(),
            "trusted": [vertex_to_json(v) for v in sorted(sample.trusted)],
            "path": [v.to_json() for v in sample.path.vertices],
            "shift": sample.shift.to_json(),
            "coin": str(sample.provenance.get("coin", "heads")),
            "source": {
                "radius": source.window.radius,
                "margin": source.window.margin,
                "edges": source.edges.to_json(),
                "trusted": [vertex_to_json(v) for v in sorted(source.trusted)],
            },
            "provenance": to_jsonable(dict(sample.provenance)),
        }

    def from_json(self, doc: Dict) -> AbelianSample:
        rank, moduli = doc["rank"], tuple(doc["moduli"])
        window = build_abelian_window(rank, moduli, doc["radius"], doc["margin"])
        src = doc["source"]
        source_window = build_grid_window(rank, src["radius"], src["margin"])
        source = RaySample(
            edge_set_from_json(src["edges"], rank, vertices=source_window.vertices),
            vertices_from_json(src["trusted"], rank),
            source_window,
        )

        vertices = tuple(element(v, rank, moduli) for v in doc["path"])
        cosets = tuple(element(v.torsion, 0, moduli) for v in vertices)
        path = CosetPath(vertices, cosets)
        matching = matching_split(source.edges, CoinFlip(doc.get("coin") == "heads"), source.trusted)
        assembled = assemble_abelian(matching, path, window, source.edges.vertices)
        return AbelianSample(
            window,
            source,
            matching,
            path,
            assembled,
            edge_set_from_json(doc["edges"], rank, moduli, vertices=window.vertices),
            vertices_from_json(doc["trusted"], rank, moduli),
            element(doc["shift"], rank, moduli),
            doc.get("provenance", {}),
        )

    def render(self, sample: AbelianSample) -> Dict[str, str]:
        if len(sample.window.vertices) > DOT_VERTEX_LIMIT:
            return {}
        return {"dot": edge_set_dot(sample.edges, sample.window)}
