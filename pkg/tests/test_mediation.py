# tests/test_mediation.py
import numpy as np
import pytest

from src.data.loader import dataset_from_columns
from src.errors import ParameterError, RankDeficientError, TooFewRowsError
from src.mediation.analysis import (
    UNTESTABLE_ASSUMPTIONS,
    Consistency,
    EffectDecomposition,
    MediationOutcome,
    causal_steps,
    check_assumptions,
    classify_consistency,
    decompose_effects,
    fit_mediation,
    sample_size_advisory,
    triangle_roles,
)
from src.model.dsl import VariableRole
from tests.helpers import exact_data


def _decomposition(direct, indirect):
    return EffectDecomposition(
        direct=direct,
        indirect_product=indirect,
        indirect_difference=indirect,
        total_eq1=direct + indirect,
        total_composed=direct + indirect,
    )


class TestFitMediation:
    """Tests for the three mediation regressions."""

    def test_recovers_paths(self):
        """Test that exact-path data gives back the design coefficients."""
        fit = fit_mediation(exact_data(0.5, 0.4, 0.2), "X", "M", "Y")

        assert fit.beta3 == pytest.approx(0.5)
        assert fit.betaM == pytest.approx(0.4)
        assert fit.beta2 == pytest.approx(0.2, abs=1e-12)
        assert fit.beta1 == pytest.approx(0.2 + 0.5 * 0.4)

    def test_identity_on_random_datasets(self):
        """Test that the difference and product measures agree on 1000 datasets."""
        rng = np.random.default_rng(99)
        for _ in range(1000):
            n = int(rng.integers(10, 501))
            x = rng.normal(size=n)
            m = rng.normal() * x + rng.normal(size=n)
            y = rng.normal() * x + rng.normal() * m + rng.normal(size=n)
            fit = fit_mediation(dataset_from_columns(("X", "M", "Y"), x, m, y), "X", "M", "Y")
            scale = max(abs(fit.beta1), abs(fit.beta3 * fit.betaM), 1e-12)
            assert abs((fit.beta1 - fit.beta2) - fit.beta3 * fit.betaM) / scale < 1e-10

    def test_collinear_mediator(self):
        """Test that a mediator identical to X is rejected as rank deficient."""
        x = np.random.default_rng(4).normal(size=30)
        data = dataset_from_columns(("X", "M", "Y"), x, x, x + 1.0)

        with pytest.raises(RankDeficientError):
            fit_mediation(data, "X", "M", "Y")

    def test_rank_tolerance_is_configurable(self):
        """Test that a stricter rank tolerance rejects a nearly collinear mediator."""
        rng = np.random.default_rng(4)
        x = rng.normal(size=60)
        m = x + 1e-7 * rng.normal(size=60)
        data = dataset_from_columns(("X", "M", "Y"), x, m, x + rng.normal(size=60))

        fit_mediation(data, "X", "M", "Y")
        with pytest.raises(RankDeficientError):
            fit_mediation(data, "X", "M", "Y", rank_tol=1e-4)

    def test_names_must_differ(self, mediation_data):
        """Test that X, M and Y must be distinct columns."""
        with pytest.raises(ParameterError):
            fit_mediation(mediation_data, "X", "X", "Y")

    def test_needs_five_rows(self):
        """Test that fewer than five complete rows are refused."""
        data = dataset_from_columns(("X", "M", "Y"), [1.0, 2.0, 3.0, 4.0], [2.0, 1.0, 4.0, 3.0], [0.0, 1.0, 1.0, 3.0])

        with pytest.raises(TooFewRowsError):
            fit_mediation(data, "X", "M", "Y")

    def test_coefficient_table(self, mediation_data):
        """Test the shape of the coefficient table."""
        table = fit_mediation(mediation_data, "X", "M", "Y").coefficients()

        assert set(table) == {"beta1", "beta2", "betaM", "beta3"}
        assert set(table["betaM"]) == {"estimate", "se", "t", "p"}

    def test_standardized_paths(self, mediation_data):
        """Test that standardized paths rescale by predictor and outcome SDs."""
        fit = fit_mediation(mediation_data, "X", "M", "Y")
        std = fit.standardized(mediation_data)
        sd_x = np.std(mediation_data.column("X"), ddof=1)
        sd_m = np.std(mediation_data.column("M"), ddof=1)

        assert std["beta3"] == pytest.approx(fit.beta3 * sd_x / sd_m)


class TestDecomposition:
    """Tests for splitting the total effect."""

    def test_effects(self):
        """Test direct, mediated and total effects plus their ratios."""
        dec = decompose_effects(fit_mediation(exact_data(0.6, 0.5, 0.2), "X", "M", "Y"))

        assert dec.direct == pytest.approx(0.2)
        assert dec.indirect_product == pytest.approx(0.3)
        assert dec.total_eq1 == pytest.approx(0.5)
        assert dec.total_composed == pytest.approx(dec.total_eq1, abs=1e-12)
        assert dec.proportion_mediated == pytest.approx(0.6)
        assert dec.ratio_indirect_direct == pytest.approx(1.5)

    def test_zero_a_path(self):
        """Test that both mediated measures vanish when a is zero."""
        dec = decompose_effects(fit_mediation(exact_data(0.0, 0.5, 0.3), "X", "M", "Y"))

        assert dec.indirect_product == pytest.approx(0.0, abs=1e-12)
        assert dec.indirect_difference == pytest.approx(0.0, abs=1e-12)
        assert dec.total_eq1 == pytest.approx(dec.direct)

    def test_ratios_undefined_at_zero(self):
        """Test that the proportion mediated is undefined for a zero total."""
        dec = decompose_effects(fit_mediation(exact_data(0.5, 0.5, -0.25), "X", "M", "Y"))

        assert dec.proportion_mediated is None


class TestConsistency:
    """Tests for the consistent / inconsistent classification."""

    def test_opposite_signs(self):
        """Test that opposite-signed effects are inconsistent."""
        assert classify_consistency(_decomposition(-0.25, 0.3), tol=0.01) is Consistency.INCONSISTENT

    def test_same_signs(self):
        """Test that same-signed effects are consistent."""
        assert classify_consistency(_decomposition(0.1, 0.3)) is Consistency.CONSISTENT

    def test_tiny_effects_are_consistent(self):
        """Test that an effect inside the tolerance never flips the verdict."""
        assert classify_consistency(_decomposition(-0.001, 0.3), tol=0.01) is Consistency.CONSISTENT

    def test_negative_tol(self):
        """Test that a negative tolerance is refused."""
        with pytest.raises(ParameterError):
            classify_consistency(_decomposition(0.1, 0.3), tol=-1.0)

    def test_cancelling_paths(self):
        """Test a model whose direct and mediated effects cancel exactly."""
        # a > 0, b < 0 and a positive direct path tuned so the total is near zero
        fit = fit_mediation(exact_data(0.5, -0.6, 0.3, n=500), "X", "M", "Y")
        dec = decompose_effects(fit)

        assert classify_consistency(dec) is Consistency.INCONSISTENT
        assert abs(dec.total_eq1) < 1e-10


class TestCausalSteps:
    """Tests for the four-step procedure."""

    def test_complete_mediation(self):
        """Test complete mediation when the direct path is zero."""
        verdict = causal_steps(fit_mediation(exact_data(0.6, 0.6, 0.0, n=500), "X", "M", "Y"))

        assert verdict.step_results[:3] == (True, True, True)
        assert verdict.outcome is MediationOutcome.COMPLETE
        assert verdict.failed_step is None

    def test_partial_mediation(self):
        """Test partial mediation when the direct path stays significant."""
        verdict = causal_steps(fit_mediation(exact_data(0.5, 0.5, 0.5, n=500), "X", "M", "Y"))

        assert verdict.step_results == (True, True, True, True)
        assert verdict.outcome is MediationOutcome.PARTIAL

    def test_no_total_effect(self):
        """Test that a cancelled total effect fails step 1 with a suppression note."""
        verdict = causal_steps(fit_mediation(exact_data(0.5, 0.5, -0.25, n=500), "X", "M", "Y"))

        assert verdict.outcome is MediationOutcome.NO_MEDIATION
        assert verdict.failed_step == 1
        assert "suppression" in verdict.note
        assert verdict.consistency is Consistency.INCONSISTENT

    def test_no_a_path(self):
        """Test that a zero a path fails step 2."""
        verdict = causal_steps(fit_mediation(exact_data(0.0, 0.5, 0.5, n=500), "X", "M", "Y"))

        assert verdict.failed_step == 2

    def test_no_b_path(self):
        """Test that a zero b path fails step 3."""
        verdict = causal_steps(fit_mediation(exact_data(0.5, 0.0, 0.5, n=500), "X", "M", "Y"))

        assert verdict.failed_step == 3

    def test_steps_monotone_in_alpha(self):
        """Test that a step passing at one alpha passes at every larger alpha."""
        rng = np.random.default_rng(31)
        alphas = (0.001, 0.01, 0.05, 0.1, 0.2, 0.5)
        for _ in range(200):
            n = int(rng.integers(20, 200))
            x = rng.normal(size=n)
            m = rng.normal(scale=0.3) * x + rng.normal(size=n)
            y = rng.normal(scale=0.3) * x + rng.normal(scale=0.3) * m + rng.normal(size=n)
            fit = fit_mediation(dataset_from_columns(("X", "M", "Y"), x, m, y), "X", "M", "Y")
            results = [causal_steps(fit, alpha=a).step_results for a in alphas]
            for smaller, larger in zip(results, results[1:]):
                assert all(wide or not narrow for narrow, wide in zip(smaller, larger))


class TestAssumptions:
    """Tests for the assumption diagnostics."""

    @pytest.fixture
    def setup(self, mediation_data):
        """Fit the shared mediation sample and run the diagnostics."""
        fit = fit_mediation(mediation_data, "X", "M", "Y")
        report = check_assumptions(fit, mediation_data)

        return fit, report

    def test_interaction_detected(self):
        """Test that a real X*M interaction is flagged."""
        rng = np.random.default_rng(21)
        x = rng.normal(size=500)
        m = rng.normal(size=500)
        y = x * m + rng.normal(size=500)
        data = dataset_from_columns(("X", "M", "Y"), x, m, y)

        report = check_assumptions(fit_mediation(data, "X", "M", "Y"), data)

        assert report.interaction_significant
        assert report.interaction_coef == pytest.approx(1.0, abs=0.2)

    def test_untestable_list(self, setup):
        """Test that the untestable assumptions are always listed."""
        _, report = setup

        assert len(report.untestable) > 0
        assert report.untestable == UNTESTABLE_ASSUMPTIONS

    def test_residual_correlation_is_small(self, setup):
        """Test that OLS leaves the eq2 and eq3 residuals uncorrelated."""
        _, report = setup

        assert abs(report.residual_correlation) < 1e-8

    def test_alpha_carried(self, setup):
        """Test that the default alpha is recorded on the report."""
        _, report = setup

        assert report.alpha == 0.05

    @pytest.mark.slow
    def test_interaction_false_positive_rate(self):
        """Test the interaction test's false-positive rate under no interaction."""
        rng = np.random.default_rng(2024)
        rejections = 0
        for _ in range(1000):
            x = rng.normal(size=100)
            m = 0.4 * x + rng.normal(size=100)
            y = 0.3 * x + 0.4 * m + rng.normal(size=100)
            data = dataset_from_columns(("X", "M", "Y"), x, m, y)
            rejections += check_assumptions(fit_mediation(data, "X", "M", "Y"), data).interaction_significant

        assert abs(rejections / 1000 - 0.05) <= 0.02


class TestSampleSizeAdvisory:
    """Tests for the minimum sample size advisories."""

    def test_single_mediator_small_n(self):
        """Test the advisory for one mediator below 50 cases."""
        roles = {"X": VariableRole.EXOGENOUS, "M": VariableRole.MEDIATOR, "Y": VariableRole.ENDOGENOUS}

        assert len(sample_size_advisory(roles, 49)) == 1

    def test_two_mediators(self):
        """Test the advisory for two mediators below the larger minimum."""
        roles = {
            "X": VariableRole.EXOGENOUS,
            "M1": VariableRole.MEDIATOR,
            "M2": VariableRole.MEDIATOR,
            "Y": VariableRole.ENDOGENOUS,
        }

        assert len(sample_size_advisory(roles, 80)) == 1

    def test_large_sample(self, mediation_data):
        """Test that a large sample gets no advisory."""
        fit = fit_mediation(mediation_data, "X", "M", "Y")

        assert sample_size_advisory(triangle_roles(fit), 500) == []
