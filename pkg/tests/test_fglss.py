"""Unit tests for FGLSS graph construction and proof/independent-set correspondences."""

from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from fglss_lab.errors import LabInputError
from fglss_lab.fglss import (
    FglssGraph,
    IndependentSet,
    build_from_queries,
    build_sampled,
    conflict,
    is_from_proof,
    is_independent,
    strategy_from_is,
    to_dimacs,
)
from fglss_lab.label_cover import gen_planted
from fglss_lab.mwis import mwis_exact
from fglss_lab.pcp import VerifierConfig, sample_query
from fglss_lab.predicate import hk_evaluate_batch
from fglss_lab.proofs import make_correct_proof, make_random_proof
from fglss_lab.serialization import dumps


class TestBuildSampled:
    """Tests for build_sampled() function."""

    def test_single_query_is_clique(self, tiny_instance, cfg_r2):
        """Test N=1 at r=2 gives 4 pairwise adjacent vertices."""
        graph = build_sampled(tiny_instance, cfg_r2, 1, seed=3)
        assert graph.graph.number_of_nodes() == 4
        assert graph.graph.number_of_edges() == 6

    def test_eight_queries(self, tiny_instance, cfg_r2):
        """Test N=8 gives 32 vertices and a clique per query."""
        graph = build_sampled(tiny_instance, cfg_r2, 8, seed=3)
        assert graph.graph.number_of_nodes() == 32
        for q in range(8):
            for a, b in combinations(range(4), 2):
                assert graph.graph.has_edge(graph.vertex_id(q, a), graph.vertex_id(q, b))

    @pytest.mark.parametrize("n", [1, 5, 16])
    def test_total_weight_is_k_plus_one(self, tiny_instance, n):
        """Test total weight equals K+1 exactly."""
        cfg = VerifierConfig(r=2, seed=0)
        assert build_sampled(tiny_instance, cfg, n, seed=n).total_weight == 4

    def test_total_weight_r3(self, tiny_instance):
        """Test total weight K+1 = 8 at r = 3."""
        graph = build_sampled(tiny_instance, VerifierConfig(r=3), 3, seed=1)
        assert graph.total_weight == 8
        assert graph.graph.number_of_nodes() == 24

    def test_vertex_attributes(self, tiny_instance, cfg_r2):
        """Test vertex id q*(K+1)+a carries query, codeword and weight 1/N."""
        graph = build_sampled(tiny_instance, cfg_r2, 4, seed=2)
        data = graph.graph.nodes[graph.vertex_id(2, 3)]
        assert data == {"query": 2, "codeword": 3, "weight": Fraction(1, 4)}
        assert graph.split(11) == (2, 3)

    def test_edges_match_conflict(self, tiny_instance, cfg_r2):
        """Test the edge set equals the brute-force answer-map comparison."""
        graph = build_sampled(tiny_instance, cfg_r2, 6, seed=5)
        for v1, v2 in combinations(sorted(graph.graph.nodes), 2):
            assert graph.graph.has_edge(v1, v2) == conflict(graph, v1, v2)

    def test_extended_queries(self, tiny_instance, cfg_r2):
        """Test graphs on the t-extension keep the base instance and t."""
        graph = build_sampled(tiny_instance, cfg_r2, 2, seed=1, t=2)
        assert graph.t == 2
        assert graph.instance.L == tiny_instance.L * 4
        assert graph.queries[0].bundles.shape[1] == 8 + 2 * 16

    def test_deterministic(self, tiny_instance, cfg_r2):
        """Test the same seed gives a byte-identical sidecar."""
        first = build_sampled(tiny_instance, cfg_r2, 4, seed=9)
        second = build_sampled(tiny_instance, cfg_r2, 4, seed=9)
        assert dumps(first.to_dict()) == dumps(second.to_dict())


class TestConflict:
    """Tests for conflict() function."""

    def test_same_query_different_codewords(self, tiny_instance, cfg_r2):
        """Test two assignments of one query conflict."""
        graph = build_sampled(tiny_instance, cfg_r2, 1, seed=1)
        assert conflict(graph, 0, 1) is True
        assert conflict(graph, 2, 2) is False

    def test_disjoint_tuples_do_not_conflict(self):
        """Test queries sharing no vertex tuple never conflict."""
        inst, _ = gen_planted(2, 2, 2, 2, 2, 4)
        cfg = VerifierConfig(r=1, eta=0)
        # with K = 1 a query touches the single tuple (u_e); edges 0 and 1 use u=0 and u=1
        rng = np.random.default_rng(0)
        queries = []
        while len({q.edge_indices for q in queries}) < 2 or len(queries) < 2:
            qs = sample_query(inst, cfg, rng)
            if not queries or qs.edge_indices != queries[0].edge_indices:
                queries.append(qs)
        graph = build_from_queries(inst, cfg, 0, queries[:2])
        for a in range(2):
            for b in range(2):
                assert not conflict(graph, graph.vertex_id(0, a), graph.vertex_id(1, b))
                assert not graph.graph.has_edge(graph.vertex_id(0, a), graph.vertex_id(1, b))

    def test_identical_queries_conflict_on_different_codewords(self, tiny_instance, cfg_r2):
        """Test two copies of one query conflict exactly when their codewords differ."""
        qs = sample_query(tiny_instance, cfg_r2, np.random.default_rng(7))
        graph = build_from_queries(tiny_instance, cfg_r2, 0, [qs, qs])
        for a in range(4):
            for b in range(4):
                expected = a != b
                assert conflict(graph, graph.vertex_id(0, a), graph.vertex_id(1, b)) == expected
                assert graph.graph.has_edge(graph.vertex_id(0, a),
                                            graph.vertex_id(1, b)) == expected

    def test_negated_bundles_match_negated_codewords(self, tiny_instance, cfg_r2):
        """Test folding: a query with all bundles negated agrees with z on -z."""
        qs = sample_query(tiny_instance, cfg_r2, np.random.default_rng(8))
        flipped = type(qs)(qs.L, qs.R, qs.edge_indices, -qs.bundles, -qs.pre_noise,
                           qs.noise_mask)
        graph = build_from_queries(tiny_instance, cfg_r2, 0, [qs, flipped])
        codewords = cfg_r2.predicate.codeword_matrix
        # -z is not a codeword at r = 2, so every cross pair conflicts
        assert not hk_evaluate_batch(cfg_r2.predicate, -codewords).any()
        for a in range(4):
            for b in range(4):
                assert conflict(graph, graph.vertex_id(0, a), graph.vertex_id(1, b))


class TestIsFromProof:
    """Tests for is_from_proof() function."""

    def test_correct_proof_noise_free_weight_one(self, tiny_instance, tiny_labeling):
        """Test every query contributes its accepting vertex at eta = 0."""
        cfg = VerifierConfig(r=2, eta=0)
        graph = build_sampled(tiny_instance, cfg, 12, seed=4)
        independent = is_from_proof(graph, make_correct_proof(tiny_labeling))
        assert independent.weight == 1
        assert len(independent.vertices) == 12
        assert is_independent(graph, independent.vertices)

    def test_weight_equals_accept_fraction(self, tiny_instance):
        """Test the weight is the exact accepted fraction of the 64 logged queries."""
        cfg = VerifierConfig(r=2, seed=0)
        graph = build_sampled(tiny_instance, cfg, 64, seed=6)
        proof = make_random_proof(2)
        independent = is_from_proof(graph, proof)
        edges, bundles = graph.stacked()
        accepted = hk_evaluate_batch(cfg.predicate,
                                     proof.evaluate(graph.instance, edges, bundles)).sum()
        assert independent.weight == Fraction(int(accepted), 64)
        assert is_independent(graph, independent.vertices)


class TestStrategyFromIs:
    """Tests for strategy_from_is() function."""

    def test_mwis_strategy_accept_weight(self, tiny_instance, cfg_r2):
        """Test the merged MWIS strategy accepts exactly the MWIS weight of the log."""
        graph = build_sampled(tiny_instance, cfg_r2, 8, seed=2)
        weight, independent = mwis_exact(graph)
        report = strategy_from_is(graph, independent)
        assert report.contradictions == []
        assert report.is_weight == weight
        assert report.accept_weight == weight

    def test_singleton(self, tiny_instance, cfg_r2):
        """Test one vertex answers exactly its own query."""
        graph = build_sampled(tiny_instance, cfg_r2, 4, seed=1)
        report = strategy_from_is(graph, IndependentSet(frozenset({5}), Fraction(1, 4)))
        assert report.is_weight == Fraction(1, 4)
        assert report.accept_weight >= Fraction(1, 4)
        assert len(report.proof.entries) == 3

    def test_empty(self, tiny_instance, cfg_r2):
        """Test the empty set gives an empty strategy of weight 0."""
        graph = build_sampled(tiny_instance, cfg_r2, 4, seed=1)
        report = strategy_from_is(graph, IndependentSet(frozenset(), Fraction(0)))
        assert report.proof.entries == {}
        assert report.is_weight == 0
        assert report.accept_weight == 0

    def test_rejects_dependent_set(self, tiny_instance, cfg_r2):
        """Test two vertices of one query are refused."""
        graph = build_sampled(tiny_instance, cfg_r2, 2, seed=1)
        with pytest.raises(LabInputError) as exc_info:
            strategy_from_is(graph, IndependentSet(frozenset({0, 1}), Fraction(1)))
        assert "independent set" in str(exc_info.value)


class TestSerialization:
    """Tests for the graph sidecar and DIMACS text."""

    def test_sidecar_rebuilds_graph(self, tiny_instance, cfg_r2):
        """Test from_dict() re-derives the same vertices and edges."""
        graph = build_sampled(tiny_instance, cfg_r2, 5, seed=3, t=1)
        restored = FglssGraph.from_dict(graph.to_dict())
        assert restored.t == 1
        assert sorted(restored.graph.nodes) == sorted(graph.graph.nodes)
        assert {frozenset(e) for e in restored.graph.edges} == \
            {frozenset(e) for e in graph.graph.edges}
        assert restored.total_weight == 4

    def test_dimacs(self, tiny_instance, cfg_r2):
        """Test the DIMACS header, weight lines and 1-based edges."""
        graph = build_sampled(tiny_instance, cfg_r2, 1, seed=3)
        lines = to_dimacs(graph).splitlines()
        assert lines[0] == "p edge 4 6"
        assert lines[1] == "n 1 1 1"
        assert "e 1 2" in lines
        assert len(lines) == 1 + 4 + 6

    def test_malformed_sidecar(self):
        """Test a sidecar without queries raises LabInputError."""
        with pytest.raises(LabInputError):
            FglssGraph.from_dict({"r": 2})

    def test_empty_query_log(self, tiny_instance, cfg_r2):
        """Test a graph needs at least one query."""
        with pytest.raises(LabInputError):
            build_from_queries(tiny_instance, cfg_r2, 0, [])

