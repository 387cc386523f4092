"""Unit tests for the parameter ledger, the planted pipeline and report assembly."""

from fractions import Fraction

import pytest

from fglss_lab.errors import LabInputError, MissingArtifactError
from fglss_lab.reports import (
    ARTIFACTS,
    TARGET_GAP,
    PipelineSizes,
    ReductionParams,
    assemble_report,
    auto_t,
    run_pipeline,
)
from fglss_lab.serialization import read_json

SMALL = PipelineSizes(trials=2000, good_queries=12)


@pytest.fixture
def pipeline_r2_t3(tmp_path):
    """Artifacts of the planted pipeline at r = 2, t = 3."""
    params = ReductionParams.from_r(2, t=3)
    paths = run_pipeline(params, tmp_path / "artifacts", seed=7, sizes=SMALL)
    return params, paths


class TestAutoT:
    """Tests for auto_t() function."""

    @pytest.mark.parametrize("K, C, expected", [(1, 1, 0), (3, 1, 5), (7, 1, 9), (3, 4, 7)])
    def test_smallest_power_above_ck3(self, K, C, expected):
        """Test 2^t >= C*K^3 > 2^(t-1)."""
        assert auto_t(K, C) == expected


class TestReductionParams:
    """Tests for ReductionParams.from_r() and ledger()."""

    def test_auto_t_and_default_eta(self):
        """Test r = 2 gives K = 3, t = 5 and eta = 1/9."""
        params = ReductionParams.from_r(2)
        assert params.K == 3
        assert params.t == 5
        assert params.t_is_auto is True
        assert params.eta == Fraction(1, 9)

    def test_given_t(self):
        """Test an explicit t is kept and marked as given."""
        params = ReductionParams.from_r(3, t=4, eta="1/100")
        assert params.t == 4
        assert params.ledger()["t_rule"] == "given"
        assert params.ledger()["eta"] == "1/100"

    def test_ledger_is_symbolic(self):
        """Test delta and sigma stay symbolic while the bounds are exact."""
        ledger = ReductionParams.from_r(2).ledger()
        assert ledger["palette_2^t"] == 32
        assert ledger["delta"]["symbolic"] is True
        assert ledger["sigma"]["symbolic"] is True
        assert ledger["completeness_bound"] == "0"
        assert ledger["random_baseline"] == "1/2"
        assert ledger["target_gap"] == TARGET_GAP

    def test_invalid_r(self):
        """Test r outside the supported range is refused."""
        with pytest.raises(LabInputError):
            ReductionParams.from_r(0)


class TestRunPipeline:
    """Tests for run_pipeline() function."""

    def test_writes_every_artifact(self, pipeline_r2_t3):
        """Test each named artifact exists on disk."""
        _, paths = pipeline_r2_t3
        assert set(paths) == set(ARTIFACTS)
        for path in paths.values():
            assert path.is_file()

    def test_correct_proof_beats_random(self, pipeline_r2_t3):
        """Test the correct proof's estimate exceeds the random proof's."""
        _, paths = pipeline_r2_t3
        correct = read_json(paths["acceptance_correct"], "acceptance_correct")
        random_ = read_json(paths["acceptance_random"], "acceptance_random")
        assert correct["estimate"] > random_["estimate"]

    def test_good_fraction_points(self, pipeline_r2_t3):
        """Test the curve covers t-2, t-1 and t."""
        _, paths = pipeline_r2_t3
        points = read_json(paths["good_fraction"], "good_fraction")["points"]
        assert [p["t"] for p in points] == [1, 2, 3]


class TestAssembleReport:
    """Tests for assemble_report() function."""

    def test_gap_section(self, pipeline_r2_t3):
        """Test the report's palette stays within 2^t with a valid coloring."""
        params, paths = pipeline_r2_t3
        report = assemble_report(params, paths)
        assert report["coloring"]["violations"] == []
        assert report["coloring"]["palette_size"] <= 8
        gap = report["gap"]
        assert gap["completeness_colors"] == 8
        assert gap["measured_palette"] == report["coloring"]["palette_size"]
        assert gap["measured_not_good_fraction"] is not None
        assert gap["target_gap"] == TARGET_GAP
        assert report["instance"]["value_exact"] == "1/1"
        assert report["instance"]["labeling_satisfied"] == "1/1"

    def test_missing_artifact_file(self, pipeline_r2_t3):
        """Test a deleted file is reported by artifact name."""
        params, paths = pipeline_r2_t3
        paths["mwis"].unlink()
        with pytest.raises(MissingArtifactError) as exc_info:
            assemble_report(params, paths)
        assert exc_info.value.artifact == "mwis"

    def test_unreferenced_required_artifact(self, pipeline_r2_t3):
        """Test the report refuses to run without the coloring."""
        params, paths = pipeline_r2_t3
        del paths["coloring"]
        with pytest.raises(LabInputError) as exc_info:
            assemble_report(params, paths)
        assert "'coloring'" in str(exc_info.value)

    def test_parameter_mismatch(self, pipeline_r2_t3):
        """Test a graph built at another t is refused."""
        _, paths = pipeline_r2_t3
        with pytest.raises(LabInputError) as exc_info:
            assemble_report(ReductionParams.from_r(2, t=4), paths)
        assert "t=3" in str(exc_info.value)

    def test_optional_artifacts(self, pipeline_r2_t3):
        """Test the report works from the four required artifacts alone."""
        params, paths = pipeline_r2_t3
        required = {name: paths[name] for name in ("instance", "graph", "mwis", "coloring")}
        report = assemble_report(params, required)
        assert "good_fraction" not in report
        assert report["gap"]["measured_not_good_fraction"] is None
        assert "correct" not in report["acceptance"]
