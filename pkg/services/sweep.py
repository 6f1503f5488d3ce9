"""
Exhaustive small-graph sweep of the finite Hamilton-cycle construction:
every connected graph up to seven vertices, every spanning tree, and either
every relevant order assignment or a batch of random ones.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Dict, Iterator, List, Optional, Tuple

import networkx as nx

from core.graphs import FiniteGraph, graph_power
from services.cube_ray import (
    ChildEnumeration,
    child_order_assignments,
    finite_hamilton_cycle,
    sample_orders,
)
from services.invariance import sample_rng
from services.tree_sampler import rooted_tree
from services.verify import brute_force_hamiltonian, check_hamilton_cycle


logger = logging.getLogger(__name__)

MAX_ATLAS_VERTICES = 7
FAILURES_KEPT = 20


def connected_graphs(max_vertices: int) -> Iterator[Tuple[int, nx.Graph]]:
    """Connected graphs on 3..max_vertices vertices, one per isomorphism class."""
    max_vertices = min(max_vertices, MAX_ATLAS_VERTICES)
    for index, G in enumerate(nx.graph_atlas_g()):
        n = G.number_of_nodes()
        if n > max_vertices:
            break
        if n >= 3 and nx.is_connected(G):
            yield index, G


def sweep_graph(
    index: int,
    seed: int,
    exhaustive_orders: int,
    random_orders: int,
    enumeration: ChildEnumeration = ChildEnumeration.ASCENDING,
    max_trees: Optional[int] = None,
) -> Dict:
    G = nx.graph_atlas(index)
    graph = FiniteGraph(G)
    nodes = sorted(G.nodes)
    n = len(nodes)
    rng = sample_rng(seed, index)
    oracle = brute_force_hamiltonian(graph_power(graph, 3))

    exhaustive = n <= exhaustive_orders
    trees = rooted = assignments = 0
    failures: List[Dict] = []
    for tree_index, tree in enumerate(nx.SpanningTreeIterator(G)):
        if max_trees is not None and tree_index >= max_trees:
            break
        trees += 1
        # every root when exhaustive, otherwise the root rotates with the tree
        roots = nodes if exhaustive else [nodes[tree_index % n]]
        for root in roots:
            rooted += 1
            T = rooted_tree(tree, root)
            if exhaustive:
                candidates = child_order_assignments(graph, T)
            else:
                candidates = (sample_orders(graph, rng) for _ in range(random_orders))
            for orders in candidates:
                assignments += 1
                cycle = finite_hamilton_cycle(graph, T, orders, enumeration=enumeration)
                failed = [c for c in check_hamilton_cycle(cycle, graph, 3) if not c.passed]
                if failed:
                    failures.append({
                        "atlas_index": index,
                        "tree": sorted(tree.edges),
                        "root": T.root,
                        "check": failed[0].name,
                        "witness": failed[0].witness,
                    })
    return {
        "atlas_index": index,
        "vertices": n,
        "trees": trees,
        "rooted_trees": rooted,
        "assignments": assignments,
        "failures": failures,
        "oracle": oracle,
    }


def sweep_cube(
    max_vertices: int = MAX_ATLAS_VERTICES,
    exhaustive_orders: int = 5,
    random_orders: int = 10,
    seed: int = 0,
    enumeration: ChildEnumeration = ChildEnumeration.ASCENDING,
    workers: int = 1,
    max_trees: Optional[int] = None,
) -> Dict:
    """
    Run the sweep and aggregate per-graph results in atlas order. Every graph
    must also pass the brute-force Hamiltonicity oracle on its cube.
    """
    indices = [index for index, _ in connected_graphs(max_vertices)]
    run = partial(
        sweep_graph,
        seed=seed,
        exhaustive_orders=exhaustive_orders,
        random_orders=random_orders,
        enumeration=enumeration,
        max_trees=max_trees,
    )
    logger.info(f"Sweeping {len(indices)} connected graphs on at most {max_vertices} vertices ({enumeration.value})")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(run, indices))
    else:
        results = [run(i) for i in indices]

    failures = [f for r in results for f in r["failures"]]
    oracle_misses = [r["atlas_index"] for r in results if not r["oracle"]]
    summary = {
        "enumeration": enumeration.value,
        "max_vertices": max_vertices,
        "graphs": len(results),
        "trees": sum(r["trees"] for r in results),
        "rooted_trees": sum(r["rooted_trees"] for r in results),
        "assignments": sum(r["assignments"] for r in results),
        "failures": len(failures),
        "first_failures": failures[:FAILURES_KEPT],
        "oracle_misses": oracle_misses,
        "passed": not failures and not oracle_misses,
    }
    if not summary["passed"]:
        logger.warning(f"Sweep found {len(failures)} failing assignments and {len(oracle_misses)} oracle misses")
    return summary
