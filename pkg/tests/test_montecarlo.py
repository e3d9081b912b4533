# tests/test_montecarlo.py
import json

import numpy as np
import pytest

from src.data.loader import compute_moments
from src.errors import InvalidDesignError
from src.mediation.inference import CiMethod
from src.model.dsl import parse_model
from src.pathfit.matrices import build_matrices, implied_covariance
from src.simulation.montecarlo import SimulationDesign, generate_dataset, parse_method, run_study


@pytest.fixture
def small_design():
    return SimulationDesign(a=0.39, b=0.39, tau_prime=0.0, n=50, R=200, seed=123)


class TestSimulationDesign:
    """Tests for design parsing and validation."""

    def test_true_effect(self, small_design):
        """Test that the true mediated effect is a times b."""
        assert small_design.true_effect == pytest.approx(0.39 * 0.39)

    def test_from_dict(self):
        """Test building a design from a mapping with method aliases."""
        design = SimulationDesign.from_dict(
            {"a": 0.3, "b": 0.2, "tau_prime": 0.1, "n": "100", "R": 50, "seed": 9, "methods": ["normal", "product_distribution"]}
        )

        assert design.n == 100
        assert design.methods == (CiMethod.NORMAL, CiMethod.PRODUCT)

    def test_unknown_field(self):
        """Test that an unknown design field is refused."""
        with pytest.raises(InvalidDesignError, match="unknown"):
            SimulationDesign.from_dict({"a": 0.3, "b": 0.2, "tau_prime": 0.1, "n": 100, "R": 5, "seed": 1, "c": 2})

    def test_missing_seed(self):
        """Test that a design without a seed is refused."""
        with pytest.raises(InvalidDesignError, match="seed"):
            SimulationDesign.from_dict({"a": 0.3, "b": 0.2, "tau_prime": 0.1, "n": 100, "R": 5})

    def test_bad_method(self):
        """Test that an unknown interval method is refused."""
        with pytest.raises(InvalidDesignError):
            parse_method("bayes")

    def test_bad_variance(self):
        """Test that a zero disturbance SD is refused."""
        with pytest.raises(InvalidDesignError):
            SimulationDesign(a=0.3, b=0.3, tau_prime=0.0, n=50, R=5, seed=1, sd_e1=0.0)

    def test_from_json(self, tmp_path):
        """Test reading a design file with default methods."""
        path = tmp_path / "design.json"
        path.write_text(json.dumps({"a": 0.3, "b": 0.3, "tau_prime": 0.0, "n": 40, "R": 5, "seed": 2}))

        design = SimulationDesign.from_json(path)

        assert design.as_dict()["methods"] == ["normal"]

    def test_from_json_not_an_object(self, tmp_path):
        """Test that a JSON array is not a design."""
        path = tmp_path / "design.json"
        path.write_text("[1, 2]")

        with pytest.raises(InvalidDesignError):
            SimulationDesign.from_json(path)


class TestGenerateDataset:
    """Tests for the seeded generator."""

    def test_deterministic(self, small_design):
        """Test that one replication index always gives the same data."""
        first = generate_dataset(small_design, 4)
        second = generate_dataset(small_design, 4)

        np.testing.assert_array_equal(first.values, second.values)
        assert first.columns == ("X", "M", "Y")

    def test_indices_differ(self, small_design):
        """Test that different indices give different data."""
        assert not np.array_equal(generate_dataset(small_design, 0).values, generate_dataset(small_design, 1).values)

    def test_null_design_uncorrelated(self):
        """Test that a null design generates uncorrelated columns."""
        design = SimulationDesign(a=0.0, b=0.0, tau_prime=0.0, n=1_000_000, R=1, seed=5)

        corr = compute_moments(generate_dataset(design, 0)).correlation

        assert np.max(np.abs(corr - np.eye(3))) < 0.005

    def test_matches_implied_covariance(self):
        """Test generated moments against the model-implied covariance."""
        design = SimulationDesign(a=0.5, b=0.5, tau_prime=0.0, n=1_000_000, R=1, seed=6)
        mats = build_matrices(parse_model("M ~ X\nY ~ X + M\n"))
        values = {"M~X": 0.5, "Y~X": 0.0, "Y~M": 0.5, "M~~M": 1.0, "X~~X": 1.0, "Y~~Y": 1.0}
        implied = implied_covariance(mats.with_params([values[f.label] for f in mats.free]))

        sample = compute_moments(generate_dataset(design, 0)).subset(mats.variables).cov

        np.testing.assert_allclose(sample, implied, atol=0.01)


class TestRunStudy:
    """Tests for replication and aggregation."""

    def test_report_fields(self, small_design):
        """Test the summary fields of a small study."""
        report = run_study(small_design)

        assert report.replications_requested == 200
        assert report.replications_used == 200
        assert report.skipped == 0
        assert set(report.estimators) == {"product", "difference"}
        summary = report.methods["normal"]
        assert summary.coverage + summary.miss_below + summary.miss_above == pytest.approx(1.0)
        assert summary.mean_width > 0
        assert 0.0 <= report.sobel_rejection_rate <= 1.0

    def test_identity_every_replication(self, small_design):
        """Test that the difference and product estimates agree in every replication."""
        assert run_study(small_design).max_identity_error < 1e-10

    def test_deterministic(self, small_design):
        """Test that a seeded study repeats exactly."""
        assert run_study(small_design).as_dict() == run_study(small_design).as_dict()

    def test_all_methods(self):
        """Test a study running every interval method."""
        design = SimulationDesign(
            a=0.3, b=0.3, tau_prime=0.0, n=60, R=4, seed=8,
            methods=("normal", "bootstrap", "product"), B=100, draws=10_000,
        )

        report = run_study(design)

        assert set(report.methods) == {"normal", "bootstrap", "product"}
        assert report.as_dict()["design"]["methods"] == ["normal", "bootstrap", "product"]

    @pytest.mark.slow
    def test_workers_do_not_change_result(self, small_design):
        """Test that a worker pool gives the serial summary."""
        assert run_study(small_design, workers=3).as_dict() == run_study(small_design).as_dict()

    @pytest.mark.slow
    def test_sobel_se_accuracy_at_fifty(self):
        """Test that the delta SE is within 10% of the empirical SD at n=50."""
        design = SimulationDesign(a=0.39, b=0.39, tau_prime=0.0, n=50, R=10_000, seed=2024)

        product = run_study(design).estimators["product"]

        assert abs(product.mean_se - product.empirical_sd) / product.empirical_sd < 0.10

    @pytest.mark.slow
    def test_bias_shrinks_with_sample_size(self):
        """Test that the mediated-effect bias at n=1000 sits inside the n=25 Monte Carlo error."""
        small = SimulationDesign(a=0.39, b=0.39, tau_prime=0.0, n=25, R=10_000, seed=2024)
        large = SimulationDesign(a=0.39, b=0.39, tau_prime=0.0, n=1000, R=10_000, seed=2024)

        at_25 = run_study(small).estimators["product"]
        at_1000 = run_study(large).estimators["product"]

        # the product estimator is unbiased here, so both biases are Monte Carlo noise
        assert abs(at_1000.bias) < 3.0 * at_25.empirical_sd / np.sqrt(10_000)
        assert at_1000.empirical_sd < at_25.empirical_sd

    @pytest.mark.slow
    def test_normal_interval_misses_above_for_positive_effect(self):
        """Test that normal limits miss more often above a positive effect."""
        design = SimulationDesign(a=0.3, b=0.3, tau_prime=0.0, n=100, R=10_000, seed=77)

        summary = run_study(design).methods["normal"]

        assert summary.miss_above > summary.miss_below

    @pytest.mark.slow
    def test_product_interval_type_one_error(self):
        """Test that product limits hold the type I rate better than the z-test."""
        design = SimulationDesign(
            a=0.39, b=0.0, tau_prime=0.0, n=200, R=5000, seed=31,
            methods=("normal", "product"), draws=10_000,
        )

        report = run_study(design, workers=4)

        product_gap = abs(report.methods["product"].rejection_rate - 0.05)
        sobel_gap = abs(report.sobel_rejection_rate - 0.05)
        assert product_gap < sobel_gap
