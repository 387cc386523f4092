"""Exact maximum-weight independent set by branch and bound.

Vertex sets are int bitmasks over the sorted node list. Each node branches on the lowest
candidate, include-branch first, and only strict improvements replace the incumbent, so the
returned optimum is the lexicographically smallest among the maximum-weight sets. The upper
bound is a greedy clique cover of the candidates: an independent set takes at most one vertex
per clique.
"""

import logging
import math
from fractions import Fraction

import networkx as nx

from .config import ENV_MWIS_MAX_VERTICES, get_lab_config
from .errors import CapExceededError
from .fglss import FglssGraph, IndependentSet

logger = logging.getLogger(__name__)


def _lowest(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


class _BranchAndBound:
    def __init__(self, weights: list[int], neighbours: list[int]):
        self.weights = weights
        self.neighbours = neighbours
        self.best_weight = -1
        self.best_set = 0
        self.nodes_visited = 0

    def clique_cover_bound(self, candidates: int) -> int:
        total = 0
        remaining = candidates
        while remaining:
            v = _lowest(remaining)
            clique = 1 << v
            heaviest = self.weights[v]
            common = self.neighbours[v] & remaining
            while common:
                u = _lowest(common)
                clique |= 1 << u
                heaviest = max(heaviest, self.weights[u])
                common &= self.neighbours[u]
            remaining &= ~clique
            total += heaviest
        return total

    def branch(self, candidates: int, chosen: int, weight: int) -> None:
        self.nodes_visited += 1
        if not candidates:
            if weight > self.best_weight:
                self.best_weight = weight
                self.best_set = chosen
            return
        if weight + self.clique_cover_bound(candidates) <= self.best_weight:
            return
        v = _lowest(candidates)
        bit = 1 << v
        self.branch(candidates & ~bit & ~self.neighbours[v], chosen | bit, weight + self.weights[v])
        self.branch(candidates & ~bit, chosen, weight)


def mwis_exact(
    graph: FglssGraph | nx.Graph, max_vertices: int | None = None
) -> tuple[Fraction, IndependentSet]:
    """Maximum-weight independent set of a graph whose nodes carry rational 'weight'.

    Args:
        graph: An FGLSS graph or any networkx graph with a 'weight' node attribute
        max_vertices: Vertex cap (defaults to FGLSS_LAB_MWIS_MAX_VERTICES)

    Returns:
        tuple: (weight, independent set)

    Raises:
        CapExceededError: If the graph has more vertices than the cap
    """
    g = graph.graph if isinstance(graph, FglssGraph) else graph
    if max_vertices is None:
        max_vertices = get_lab_config()["mwis_max_vertices"]
    nodes = sorted(g.nodes)
    if len(nodes) > max_vertices:
        raise CapExceededError("mwis_exact", len(nodes), max_vertices, ENV_MWIS_MAX_VERTICES)
    if not nodes:
        return Fraction(0), IndependentSet(frozenset(), Fraction(0))

    position = {node: k for k, node in enumerate(nodes)}
    rational = [Fraction(g.nodes[node].get("weight", 1)) for node in nodes]
    scale = math.lcm(*(w.denominator for w in rational))
    weights = [int(w * scale) for w in rational]
    neighbours = [0] * len(nodes)
    for a, b in g.edges:
        if a != b:
            neighbours[position[a]] |= 1 << position[b]
            neighbours[position[b]] |= 1 << position[a]

    solver = _BranchAndBound(weights, neighbours)
    solver.branch((1 << len(nodes)) - 1, 0, 0)
    chosen = frozenset(nodes[k] for k in range(len(nodes)) if solver.best_set >> k & 1)
    weight = Fraction(solver.best_weight, scale)
    logger.info("MWIS weight %s on %d vertices (%d search nodes)",
                weight, len(nodes), solver.nodes_visited)
    return weight, IndependentSet(chosen, weight)
