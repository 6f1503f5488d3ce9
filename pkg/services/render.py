import logging
from typing import Dict, Iterable, Mapping, Optional

import drawsvg as svg
import networkx as nx

from core.graphs import EdgeSet, GraphLike, as_finite_graph, vertex_to_json


logger = logging.getLogger(__name__)

CELL = 16
PAD = 2

# Solid class drawn bold, dotted class dashed.
STYLES = {
    "solid": {"stroke": "black", "stroke_width": 3},
    "dotted": {"stroke": "#1f6fd1", "stroke_width": 2, "stroke_dasharray": "3,3"},
    "ray": {"stroke": "#c0392b", "stroke_width": 3},
    "tree": {"stroke": "#2e8b57", "stroke_width": 2},
}


def _point(v, radius: int):
    x, y = v.free[:2]
    return (x + radius + PAD) * CELL, (radius - y + PAD) * CELL


def lattice_svg(
    layers: Mapping[str, EdgeSet],
    radius: int,
    trusted: Optional[Iterable] = None,
    grid: bool = True,
) -> str:
    """
    Draw edge sets of a planar box window, one style per layer name, with the
    y axis pointing up.
    """
    size = (2 * radius + 2 * PAD) * CELL
    d = svg.Drawing(size, size, origin=(0, 0))
    d.append(svg.Rectangle(0, 0, size, size, fill="white"))

    if grid:
        for t in range(-radius, radius + 1):
            a = (t + radius + PAD) * CELL
            lo, hi = PAD * CELL, (2 * radius + PAD) * CELL
            d.append(svg.Line(a, lo, a, hi, stroke="lightgray", stroke_width=1))
            d.append(svg.Line(lo, a, hi, a, stroke="lightgray", stroke_width=1))

    for name, E in layers.items():
        style = STYLES.get(name, STYLES["ray"])
        for u, v in E:
            (x1, y1), (x2, y2) = _point(u, radius), _point(v, radius)
            d.append(svg.Line(x1, y1, x2, y2, stroke_linecap="round", **style))

    if trusted is not None:
        for v in sorted(trusted):
            cx, cy = _point(v, radius)
            d.append(svg.Circle(cx, cy, 2, fill="gray"))

    return d.as_svg()


def edge_set_dot(E: EdgeSet, G: Optional[GraphLike] = None, labels: Optional[Dict] = None) -> str:
    """
    DOT text of an edge set; with G, the remaining graph edges are drawn faint.
    `labels` maps edges to rule tags or other annotations.
    """
    H = nx.Graph()
    names = {}

    def name(v) -> str:
        if v not in names:
            coords = vertex_to_json(v)
            coords = coords if isinstance(coords, list) else [coords]
            names[v] = "v" + "_".join(str(c).replace("-", "m") for c in coords)
            H.add_node(names[v], label=f'"{coords}"')
        return names[v]

    for v in sorted(E.vertices):
        name(v)
    if G is not None:
        for u, v in sorted(as_finite_graph(G).edge_set().edges):
            if (u, v) not in E:
                H.add_edge(name(u), name(v), color="gray80", style="dotted")
    for u, v in E:
        attrs = {"penwidth": "2"}
        if labels and (u, v) in labels:
            attrs["label"] = str(labels[(u, v)])
        H.add_edge(name(u), name(v), **attrs)
    return nx.nx_pydot.to_pydot(H).to_string()
