"""FGLSS graphs over sampled verifier queries.

Every logged query contributes K+1 vertices, one per accepting assignment z; vertex (q, z)
claims that the K queried functions answer z on q. Two vertices conflict when they give
different answers to the same function on the same input. Inputs are compared after folding,
so x and -x sent to one function are the same proof bit with negated answer.

Vertex ids are ``query * (K + 1) + codeword_index``.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any

import networkx as nx
import numpy as np

from .errors import LabInputError
from .label_cover import LabelCoverInstance, extend
from .pcp import QueryBundleSet, VerifierConfig, sample_queries
from .predicate import hk_evaluate_batch
from .proofs import Proof, TableProof, canonical_key, vertex_tuples
from .validation import validate_non_negative_int, validate_positive_int, validate_seed

logger = logging.getLogger(__name__)

# (position, vertex tuple, packed canonical input)
ProbeKey = tuple[int, tuple[int, ...], bytes]


@dataclass(frozen=True)
class IndependentSet:
    vertices: frozenset[int]
    weight: Fraction


@dataclass(eq=False)
class FglssGraph:
    """Weighted conflict graph of (query, accepting assignment) vertices.

    ``instance`` is the instance the queries were sampled on, i.e. ``extend(base_instance, t)``.
    """

    base_instance: LabelCoverInstance
    cfg: VerifierConfig
    t: int
    queries: list[QueryBundleSet]
    query_weights: list[Fraction]
    graph: nx.Graph = field(default_factory=nx.Graph)
    probes: list[list[tuple[ProbeKey, int]]] = field(default_factory=list)
    seed: int | None = None

    @property
    def instance(self) -> LabelCoverInstance:
        return extend(self.base_instance, self.t)

    @property
    def K(self) -> int:
        return self.cfg.K

    def vertex_id(self, query: int, codeword: int) -> int:
        return query * (self.K + 1) + codeword

    def split(self, vertex: int) -> tuple[int, int]:
        """(query index, codeword index) of a vertex."""
        return divmod(vertex, self.K + 1)

    @property
    def vertices(self) -> list[tuple[int, int, Fraction]]:
        return [
            (q, a, self.query_weights[q])
            for q in range(len(self.queries))
            for a in range(self.K + 1)
        ]

    def weight(self, vertex: int) -> Fraction:
        return self.graph.nodes[vertex]["weight"]

    @property
    def total_weight(self) -> Fraction:
        return sum((self.weight(v) for v in self.graph.nodes), Fraction(0))

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """(edges, bundles) arrays of the whole query log."""
        edges = np.asarray([q.edge_indices for q in self.queries], dtype=np.int64)
        bundles = np.stack([q.bundles for q in self.queries])
        return edges, bundles

    def answer_map(self, vertex: int) -> dict[ProbeKey, int]:
        """Canonical answers vertex (q, z) commits to, one per queried function."""
        query, codeword = self.split(vertex)
        z = self.cfg.predicate.codeword_matrix[codeword]
        return {key: sign * int(z[j]) for j, (key, sign) in enumerate(self.probes[query])}

    def to_dict(self) -> dict[str, Any]:
        """JSON sidecar: parameters, base instance, query log, vertices and edges (1-based)."""
        return {
            "r": self.cfg.r,
            "eta": str(self.cfg.eta),
            "t": self.t,
            "seed": self.seed,
            "base_instance": self.base_instance.to_dict(),
            "queries": [q.to_dict() for q in self.queries],
            "query_weights": [f"{w.numerator}/{w.denominator}" for w in self.query_weights],
            "vertices": [
                {"id": v + 1, "query": q + 1, "codeword": a + 1,
                 "weight": f"{w.numerator}/{w.denominator}"}
                for v, (q, a, w) in enumerate(self.vertices)
            ],
            "edges": sorted([min(a, b) + 1, max(a, b) + 1] for a, b in self.graph.edges),
            "total_weight": str(self.total_weight),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FglssGraph":
        """Rebuild a graph from its sidecar; conflict edges are re-derived from the query log."""
        try:
            base = LabelCoverInstance.from_dict(data["base_instance"])
            cfg = VerifierConfig(r=data["r"], eta=data["eta"], seed=data.get("seed") or 0)
            t = validate_non_negative_int(data["t"], "t")
            ext = extend(base, t)
            queries = [
                QueryBundleSet.from_dict(item, cfg.K, ext.L, ext.R) for item in data["queries"]
            ]
            weights = [Fraction(w) for w in data["query_weights"]]
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, LabInputError):
                raise
            raise LabInputError(f"malformed FGLSS graph file: {e!r}") from e
        return build_from_queries(base, cfg, t, queries, weights, seed=data.get("seed"))


def build_from_queries(
    base: LabelCoverInstance,
    cfg: VerifierConfig,
    t: int,
    queries: list[QueryBundleSet],
    weights: list[Fraction] | None = None,
    seed: int | None = None,
) -> FglssGraph:
    """Assemble the FGLSS graph of a query log (uniform weights unless given)."""
    if not queries:
        raise LabInputError("an FGLSS graph needs at least one query")
    if weights is None:
        weights = [Fraction(1, len(queries))] * len(queries)
    if len(weights) != len(queries):
        raise LabInputError("query_weights must have one entry per query")

    ext = extend(base, t)
    K = cfg.K
    codewords = cfg.predicate.codeword_matrix
    fg = FglssGraph(base, cfg, t, list(queries), list(weights), seed=seed)

    for q, qs in enumerate(queries):
        tuples = vertex_tuples(ext, np.asarray([qs.edge_indices]))[0]
        probes = []
        for j in range(K):
            packed, sign = canonical_key(qs.bundles[j])
            probes.append(((j, tuple(int(v) for v in tuples[j]), packed), sign))
        fg.probes.append(probes)
        for a in range(K + 1):
            fg.graph.add_node(fg.vertex_id(q, a), query=q, codeword=a, weight=weights[q])
        # distinct accepting assignments differ on some answer
        fg.graph.add_edges_from(combinations([fg.vertex_id(q, a) for a in range(K + 1)], 2))

    # shared (function, canonical input) pairs across queries
    shared: dict[ProbeKey, list[tuple[int, int, int]]] = defaultdict(list)
    for q, probes in enumerate(fg.probes):
        for j, (key, sign) in enumerate(probes):
            shared[key].append((q, j, sign))
    for hits in shared.values():
        for (q1, j1, s1), (q2, j2, s2) in combinations(hits, 2):
            if q1 == q2:
                continue
            for a1 in range(K + 1):
                for a2 in range(K + 1):
                    if s1 * codewords[a1, j1] != s2 * codewords[a2, j2]:
                        fg.graph.add_edge(fg.vertex_id(q1, a1), fg.vertex_id(q2, a2))

    logger.info("FGLSS graph: %d queries, %d vertices, %d edges",
                len(queries), fg.graph.number_of_nodes(), fg.graph.number_of_edges())
    return fg


def build_sampled(
    inst: LabelCoverInstance, cfg: VerifierConfig, N: int, seed: int, t: int = 0
) -> FglssGraph:
    """Sample N queries on ``extend(inst, t)`` (weight 1/N each) and build their FGLSS graph."""
    N = validate_positive_int(N, "N")
    seed = validate_seed(seed)
    t = validate_non_negative_int(t, "t")
    ext = extend(inst, t)
    batch = sample_queries(ext, cfg, np.random.default_rng(seed), N)
    return build_from_queries(inst, cfg, t, [batch.query(k) for k in range(N)], seed=seed)


def conflict(graph: FglssGraph, v1: int, v2: int) -> bool:
    """True iff the two vertices answer some (function, canonical input) differently."""
    if v1 == v2:
        return False
    first = graph.answer_map(v1)
    second = graph.answer_map(v2)
    return any(key in second and second[key] != answer for key, answer in first.items())


def is_independent(graph: FglssGraph, vertices: set[int] | frozenset[int]) -> bool:
    return graph.graph.subgraph(vertices).number_of_edges() == 0


def is_from_proof(graph: FglssGraph, proof: Proof) -> IndependentSet:
    """Vertices whose assignment equals the proof's (accepting) answers, one per query at most."""
    edges, bundles = graph.stacked()
    answers = proof.evaluate(graph.instance, edges, bundles)
    index = graph.cfg.predicate.codeword_index(answers)
    chosen = frozenset(
        graph.vertex_id(q, int(a)) for q, a in enumerate(index) if a >= 0
    )
    weight = sum((graph.query_weights[q] for q, a in enumerate(index) if a >= 0), Fraction(0))
    return IndependentSet(chosen, weight)


@dataclass(frozen=True)
class StrategyReport:
    proof: TableProof
    contradictions: list[ProbeKey]
    is_weight: Fraction
    accept_weight: Fraction


def strategy_from_is(graph: FglssGraph, independent: IndependentSet) -> StrategyReport:
    """Merge the answer maps of an independent set into one partial strategy.

    The accept weight re-evaluates that strategy on the query log: a query counts when all K of
    its functions are answered and the answers satisfy H_K.

    Raises:
        LabInputError: If the vertex set contains a conflict edge
    """
    if not is_independent(graph, independent.vertices):
        raise LabInputError("strategy_from_is requires an independent set")
    merged: dict[ProbeKey, int] = {}
    contradictions: list[ProbeKey] = []
    for vertex in sorted(independent.vertices):
        for key, answer in graph.answer_map(vertex).items():
            if merged.setdefault(key, answer) != answer:
                contradictions.append(key)

    accept_weight = Fraction(0)
    pred = graph.cfg.predicate
    for q, probes in enumerate(graph.probes):
        if all(key in merged for key, _ in probes):
            answers = np.asarray([[sign * merged[key] for key, sign in probes]])
            if hk_evaluate_batch(pred, answers)[0]:
                accept_weight += graph.query_weights[q]

    is_weight = sum((graph.weight(v) for v in independent.vertices), Fraction(0))
    return StrategyReport(
        proof=TableProof(entries=merged, t=graph.t),
        contradictions=contradictions,
        is_weight=is_weight,
        accept_weight=accept_weight,
    )


def to_dimacs(graph: FglssGraph) -> str:
    """DIMACS-like text: 'p edge n m', 'n <id> <num> <den>', 'e <a> <b>' (1-based ids)."""
    g = graph.graph
    lines = [f"p edge {g.number_of_nodes()} {g.number_of_edges()}"]
    for v in sorted(g.nodes):
        w = graph.weight(v)
        lines.append(f"n {v + 1} {w.numerator} {w.denominator}")
    for a, b in sorted((min(a, b), max(a, b)) for a, b in g.edges):
        lines.append(f"e {a + 1} {b + 1}")
    return "\n".join(lines) + "\n"
