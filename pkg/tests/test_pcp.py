"""Unit tests for the verifier: sampling, verdicts and acceptance probabilities."""

import itertools
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import chisquare

from fglss_lab.errors import CapExceededError, LabInputError, PreconditionError
from fglss_lab.label_cover import Labeling, gen_planted
from fglss_lab.pcp import (
    QueryBundleSet,
    VerifierConfig,
    accept_prob_exact_enum,
    accept_prob_exact_product,
    accept_prob_mc,
    enumeration_support,
    eval_proof,
    noise_free_answers,
    random_proof_baseline,
    sample_queries,
    sample_query,
    verdict,
)
from fglss_lab.predicate import HadamardPredicate, hk_evaluate
from fglss_lab.proofs import (
    input_width,
    make_correct_proof,
    make_random_proof,
    make_table_proof,
    table_entry,
)


def within_sigma(estimate, expected, stderr_value, k=3):
    return abs(estimate - expected) <= k * stderr_value


@pytest.fixture
def narrow_planted():
    """One edge, L=1, d=2: the exact enumerator visits 512 joint choices."""
    return gen_planted(1, 1, 1, 2, 1, 5)


class TestVerifierConfig:
    """Tests for VerifierConfig defaults and validation."""

    def test_default_eta(self):
        """Test eta defaults to 1/K^2."""
        assert VerifierConfig(r=2).eta == Fraction(1, 9)
        assert VerifierConfig(r=3).eta == Fraction(1, 49)

    def test_eta_parsing(self):
        """Test fraction strings and floats become exact rationals."""
        assert VerifierConfig(r=2, eta="1/10").eta == Fraction(1, 10)
        assert VerifierConfig(r=2, eta=0.1).eta == Fraction(1, 10)

    def test_eta_out_of_range(self):
        """Test eta outside [0, 1) is rejected."""
        with pytest.raises(ValueError) as exc_info:
            VerifierConfig(r=2, eta=1)
        assert "0 <= eta < 1" in str(exc_info.value)

    def test_negative_seed(self):
        """Test a negative seed is rejected."""
        with pytest.raises(ValueError):
            VerifierConfig(r=2, seed=-3)


class TestSampleQuery:
    """Tests for sample_query() and sample_queries()."""

    def test_shapes(self, tiny_instance, cfg_r2):
        """Test bundles have shape (K, L + (K-1) R)."""
        qs = sample_query(tiny_instance, cfg_r2, np.random.default_rng(0))
        assert qs.K == 3
        assert qs.bundles.shape == (3, input_width(3, 2, 4))
        assert qs.pre_noise.shape == qs.noise_mask.shape == qs.bundles.shape

    def test_noise_free_bundles_equal_pre_noise(self, tiny_instance, cfg_r2_noise_free):
        """Test eta = 0 applies no noise."""
        batch = sample_queries(tiny_instance, cfg_r2_noise_free, np.random.default_rng(1), 50)
        assert not batch.noise_mask.any()
        assert np.array_equal(batch.bundles, batch.pre_noise)

    def test_routed_columns_are_codewords(self, tiny_instance, cfg_r2_noise_free):
        """Test (own bit at pi(r), bundle j slot i at r) is a codeword for every i and r."""
        pred = HadamardPredicate(2)
        rng = np.random.default_rng(2)
        for _ in range(20):
            qs = sample_query(tiny_instance, cfg_r2_noise_free, rng)
            for i, e in enumerate(qs.edge_indices):
                own = qs.slot(i, i)
                projection = tiny_instance.edges[e].projection
                for r in range(tiny_instance.R):
                    z = [0] * 3
                    z[i] = int(own[projection[r]])
                    for j in range(3):
                        if j != i:
                            z[j] = int(qs.slot(j, i)[r])
                    assert hk_evaluate(pred, z)

    def test_noise_rate(self, tiny_instance):
        """Test the resampling mask fires at rate eta."""
        cfg = VerifierConfig(r=2, eta="1/4", seed=0)
        batch = sample_queries(tiny_instance, cfg, np.random.default_rng(3), 2000)
        rate = batch.noise_mask.mean()
        n = batch.noise_mask.size
        assert within_sigma(rate, 0.25, (0.25 * 0.75 / n) ** 0.5, k=4)
        changed = batch.bundles != batch.pre_noise
        assert not (changed & ~batch.noise_mask).any()

    def test_deterministic(self, tiny_instance, cfg_r2):
        """Test the same seed reproduces the same batch."""
        first = sample_queries(tiny_instance, cfg_r2, np.random.default_rng(9), 10)
        second = sample_queries(tiny_instance, cfg_r2, np.random.default_rng(9), 10)
        assert np.array_equal(first.edges, second.edges)
        assert np.array_equal(first.bundles, second.bundles)

    def test_query_dict_restores_bundles(self, tiny_instance, cfg_r2):
        """Test the JSON form of a query restores its bundles and noise mask."""
        qs = sample_query(tiny_instance, cfg_r2, np.random.default_rng(4))
        restored = QueryBundleSet.from_dict(qs.to_dict(), 3, tiny_instance.L, tiny_instance.R)
        assert restored.edge_indices == qs.edge_indices
        assert np.array_equal(restored.bundles, qs.bundles)
        assert np.array_equal(restored.noise_mask, qs.noise_mask)


class TestVerdict:
    """Tests for eval_proof() and verdict()."""

    def test_correct_proof_accepted_without_noise(
        self, tiny_instance, tiny_labeling, cfg_r2_noise_free
    ):
        """Test every noise-free query accepts the correct proof."""
        proof = make_correct_proof(tiny_labeling)
        rng = np.random.default_rng(11)
        for _ in range(25):
            answers = eval_proof(proof, tiny_instance, sample_query(tiny_instance,
                                                                    cfg_r2_noise_free, rng))
            assert verdict(2, answers) is True

    def test_verdict_rejects_odd_flips(self):
        """Test a single flipped coordinate rejects at r = 2."""
        assert verdict(2, (1, 1, 1)) is True
        assert verdict(2, (-1, 1, 1)) is False

    def test_noise_free_answers_uniform_codewords(self, tiny_instance, tiny_labeling):
        """Test pre-noise answers of the correct proof are uniform over the K+1 codewords."""
        cfg = VerifierConfig(r=2, eta="1/9", seed=0)
        pred = cfg.predicate
        batch = sample_queries(tiny_instance, cfg, np.random.default_rng(12), 8000)
        answers = noise_free_answers(make_correct_proof(tiny_labeling), tiny_instance, batch)
        index = pred.codeword_index(answers)
        assert (index >= 0).all()
        _, p_value = chisquare(np.bincount(index, minlength=4))
        assert p_value > 1e-4


class TestAcceptProbMc:
    """Tests for accept_prob_mc() function."""

    def test_correct_proof_noise_free_is_one(self, tiny_instance, tiny_labeling):
        """Test the correct proof of the tiny planted instance is never rejected at eta = 0."""
        cfg = VerifierConfig(r=2, eta=0, seed=1)
        result = accept_prob_mc(tiny_instance, cfg, make_correct_proof(tiny_labeling), 100_000)
        assert result.estimate == 1.0
        assert result.accepted == result.trials == 100_000

    def test_random_proof_r2_baseline(self, tiny_instance):
        """Test a random proof is accepted at the density (K+1)/2^K = 1/2."""
        cfg = VerifierConfig(r=2, seed=2)
        result = accept_prob_mc(tiny_instance, cfg, make_random_proof(5), 100_000)
        assert within_sigma(result.estimate, 0.5, result.stderr)

    @pytest.mark.slow
    def test_random_proof_r3_baseline(self, tiny_instance):
        """Test a random proof at r = 3 is accepted at 8/128."""
        cfg = VerifierConfig(r=3, seed=3)
        result = accept_prob_mc(tiny_instance, cfg, make_random_proof(6), 100_000)
        assert within_sigma(result.estimate, 0.0625, result.stderr)

    def test_thread_count_does_not_change_result(self, tiny_instance):
        """Test threads only schedule blocks."""
        cfg = VerifierConfig(r=2, seed=4)
        proof = make_random_proof(1)
        single = accept_prob_mc(tiny_instance, cfg, proof, 5000, threads=1, block_size=700)
        pooled = accept_prob_mc(tiny_instance, cfg, proof, 5000, threads=4, block_size=700)
        assert single == pooled

    def test_noisy_correct_proof_matches_closed_form(self, tiny_instance, tiny_labeling):
        """Test the estimate at eta = 1/10 agrees with the exact product formula."""
        cfg = VerifierConfig(r=2, eta="1/10", seed=5)
        exact = float(accept_prob_exact_product(tiny_instance, cfg, tiny_labeling))
        result = accept_prob_mc(tiny_instance, cfg, make_correct_proof(tiny_labeling), 60_000)
        assert within_sigma(result.estimate, exact, result.stderr, k=4)

    @pytest.mark.parametrize("eta", ["1/18", "1/9"])
    def test_completeness_on_noise_grid(self, tiny_instance, tiny_labeling, eta):
        """Test eta in {1/(2K^2), 1/K^2}: estimate >= 1 - K^2 eta and matches the closed form."""
        cfg = VerifierConfig(r=2, eta=eta, seed=11)
        exact = float(accept_prob_exact_product(tiny_instance, cfg, tiny_labeling))
        result = accept_prob_mc(tiny_instance, cfg, make_correct_proof(tiny_labeling),
                                200_000, threads=2)
        assert result.estimate >= 1 - cfg.K**2 * float(cfg.eta)
        assert within_sigma(result.estimate, exact, result.stderr)

    @pytest.mark.slow
    def test_noisy_correct_proof_million_trials(self, tiny_instance, tiny_labeling):
        """Test 10^6 trials at eta = 1/10 land within 3 sigma of the closed form."""
        cfg = VerifierConfig(r=2, eta="1/10", seed=6)
        exact = float(accept_prob_exact_product(tiny_instance, cfg, tiny_labeling))
        result = accept_prob_mc(tiny_instance, cfg, make_correct_proof(tiny_labeling),
                                1_000_000, threads=4)
        assert within_sigma(result.estimate, exact, result.stderr)

    def test_estimate_dict(self, tiny_instance, tiny_labeling):
        """Test to_dict() reports estimate, stderr and run parameters."""
        cfg = VerifierConfig(r=2, eta=0, seed=7)
        data = accept_prob_mc(tiny_instance, cfg, make_correct_proof(tiny_labeling), 10).to_dict()
        assert data == {"estimate": 1.0, "stderr": 0.0, "trials": 10, "accepted": 10,
                        "seed": 7, "eta": "0", "r": 2}

    def test_invalid_trial_count(self, tiny_instance, tiny_labeling, cfg_r2):
        """Test N must be positive."""
        with pytest.raises(ValueError) as exc_info:
            accept_prob_mc(tiny_instance, cfg_r2, make_correct_proof(tiny_labeling), 0)
        assert "N must be a positive integer" in str(exc_info.value)


class TestAcceptProbExactProduct:
    """Tests for accept_prob_exact_product() function."""

    def test_noise_free_is_one(self, tiny_instance, tiny_labeling):
        """Test rho = 1 leaves only the all-ones codeword term."""
        cfg = VerifierConfig(r=2, eta=0)
        assert accept_prob_exact_product(tiny_instance, cfg, tiny_labeling) == 1

    def test_r2_eta_tenth(self, tiny_instance, tiny_labeling):
        """Test ((1+rho)^3 + 3 (1+rho)(1-rho)^2) / 8 with rho = 0.729."""
        cfg = VerifierConfig(r=2, eta="1/10")
        rho = Fraction(729, 1000)
        expected = ((1 + rho) ** 3 + 3 * (1 + rho) * (1 - rho) ** 2) / 8
        value = accept_prob_exact_product(tiny_instance, cfg, tiny_labeling)
        assert value == expected
        assert abs(float(value) - 0.6937) < 1e-3

    @pytest.mark.parametrize("r", [2, 3])
    def test_completeness_bound(self, tiny_instance, tiny_labeling, r):
        """Test the default noise respects 1 - K^2 eta."""
        cfg = VerifierConfig(r=r)
        value = accept_prob_exact_product(tiny_instance, cfg, tiny_labeling)
        assert value >= 1 - cfg.K**2 * cfg.eta

    def test_alpha_does_not_change_value(self, tiny_instance, tiny_labeling):
        """Test the extension alpha leaves the value unchanged."""
        cfg = VerifierConfig(r=2, eta="1/5")
        assert accept_prob_exact_product(tiny_instance, cfg, tiny_labeling, alpha=3, t=2) == \
            accept_prob_exact_product(tiny_instance, cfg, tiny_labeling)

    def test_alpha_beyond_extension(self, tiny_instance, tiny_labeling):
        """Test alpha must stay below 2^t, as for the correct proof itself."""
        cfg = VerifierConfig(r=2)
        with pytest.raises(LabInputError) as exc_info:
            accept_prob_exact_product(tiny_instance, cfg, tiny_labeling, alpha=4, t=2)
        assert "alpha must be < 2^t = 4" in str(exc_info.value)
        with pytest.raises(LabInputError):
            accept_prob_exact_product(tiny_instance, cfg, tiny_labeling, alpha=1)

    def test_unsatisfying_labeling(self, unsat_instance):
        """Test the formula refuses labelings that break an edge."""
        cfg = VerifierConfig(r=2)
        with pytest.raises(PreconditionError) as exc_info:
            accept_prob_exact_product(unsat_instance, cfg, Labeling((0,), (0,)))
        assert "satisfying every edge" in str(exc_info.value)


class TestAcceptProbExactEnum:
    """Tests for accept_prob_exact_enum() function."""

    def test_correct_proof_is_one(self, narrow_planted):
        """Test the correct proof is accepted with probability exactly 1."""
        inst, planted = narrow_planted
        cfg = VerifierConfig(r=2, eta=0)
        assert enumeration_support(inst, cfg) == 512
        assert accept_prob_exact_enum(inst, cfg, make_correct_proof(planted)) == 1

    @pytest.mark.slow
    def test_correct_proof_tiny_is_one(self, tiny_instance, tiny_labeling):
        """Test completeness on the tiny planted instance by full enumeration."""
        cfg = VerifierConfig(r=2, eta=0)
        assert accept_prob_exact_enum(tiny_instance, cfg, make_correct_proof(tiny_labeling)) == 1

    def test_negated_first_function(self, narrow_planted):
        """Test negating the correct proof's first function drops acceptance below 1."""
        inst, planted = narrow_planted
        cfg = VerifierConfig(r=2, eta=0)
        correct = make_correct_proof(planted)
        width = input_width(3, inst.L, inst.R)
        vertices = (0, 0, 0)
        entries = dict(
            table_entry(0, vertices, x, -correct.answer(inst, 0, vertices, x))
            for x in (np.array(bits, dtype=np.int8)
                      for bits in itertools.product((1, -1), repeat=width))
        )
        proof = make_table_proof(entries, fallback=correct)
        value = accept_prob_exact_enum(inst, cfg, proof)
        assert value < 1
        # one flipped coordinate leaves an odd number of -1 answers
        assert value == 0

    def test_random_proof_matches_monte_carlo(self, narrow_planted):
        """Test the enumerated value of a random proof agrees with sampling."""
        inst, _ = narrow_planted
        cfg = VerifierConfig(r=2, eta=0, seed=8)
        proof = make_random_proof(13)
        exact = accept_prob_exact_enum(inst, cfg, proof)
        assert 0 <= exact <= 1
        result = accept_prob_mc(inst, cfg, proof, 20_000)
        assert within_sigma(result.estimate, float(exact), max(result.stderr, 1e-3), k=4)

    def test_refuses_noise(self, narrow_planted):
        """Test exact enumeration requires eta = 0."""
        inst, planted = narrow_planted
        with pytest.raises(LabInputError) as exc_info:
            accept_prob_exact_enum(inst, VerifierConfig(r=2, eta="1/9"),
                                   make_correct_proof(planted))
        assert "eta = 0" in str(exc_info.value)

    def test_cap_refusal(self, narrow_planted):
        """Test the support cap refuses with an explicit cost."""
        inst, planted = narrow_planted
        with pytest.raises(CapExceededError) as exc_info:
            accept_prob_exact_enum(inst, VerifierConfig(r=2, eta=0),
                                   make_correct_proof(planted), cap=100)
        assert exc_info.value.cost == 512
        assert exc_info.value.cap == 100


class TestRandomProofBaseline:
    """Tests for random_proof_baseline() function."""

    def test_values(self):
        """Test (K+1)/2^K for r = 2 and r = 3."""
        assert random_proof_baseline(2) == Fraction(1, 2)
        assert random_proof_baseline(3) == Fraction(8, 128)
