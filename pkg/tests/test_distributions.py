# tests/test_distributions.py
import numpy as np
import pytest
from scipy import integrate, special

from src.errors import InvalidAlphaError, InvalidLevelError
from src.stats.distributions import (
    check_alpha,
    check_level,
    chi2_sf,
    critical_z,
    excess_kurtosis,
    normal_cdf,
    normal_quantile,
    normal_two_sided_p,
    t_two_sided_p,
)


def _chi2_tail_by_quadrature(x, df):
    log_norm = (df / 2.0) * np.log(2.0) + special.gammaln(df / 2.0)

    def density(t):
        return np.exp((df / 2.0 - 1.0) * np.log(t) - t / 2.0 - log_norm)

    value, _ = integrate.quad(density, x, np.inf, epsabs=1e-14, epsrel=1e-12, limit=200)
    return value


class TestDistributions:
    """Tests for tail probabilities, quantiles and parameter checks."""

    def test_normal_cdf_symmetry(self):
        """Test that the normal CDF is 0.5 at zero and symmetric."""
        assert normal_cdf(0.0) == pytest.approx(0.5)
        assert normal_cdf(1.3) + normal_cdf(-1.3) == pytest.approx(1.0)

    def test_quantile_inverts_cdf(self):
        """Test that the quantile undoes the CDF at a single point."""
        assert normal_quantile(normal_cdf(1.7)) == pytest.approx(1.7, abs=1e-10)

    def test_round_trip_over_grid(self):
        """Test that CDF and quantile are inverse on a grid from 1e-6 to 1 - 1e-6."""
        u = np.concatenate(
            [np.logspace(-6, -1, 200), np.linspace(0.1, 0.9, 801), 1.0 - np.logspace(-6, -1, 200)]
        )

        error = np.abs(normal_cdf(normal_quantile(u)) - u)

        assert error.max() < 1e-9

    def test_quantile_bounds(self):
        """Test that the quantile is undefined at 1."""
        with pytest.raises(ValueError):
            normal_quantile(1.0)

    def test_two_sided_normal(self):
        """Test the two-sided normal p-value at z = 3 and z = 0."""
        assert normal_two_sided_p(3.0) == pytest.approx(0.0026998, abs=1e-7)
        assert normal_two_sided_p(0.0) == 1.0

    def test_t_zero_gives_one(self):
        """Test that t = 0 gives a p-value of exactly one."""
        assert float(t_two_sided_p(0.0, 10)) == 1.0

    def test_t_matches_normal_for_large_df(self):
        """Test that the t tail approaches the normal tail for huge df."""
        assert float(t_two_sided_p(1.96, 1e7)) == pytest.approx(normal_two_sided_p(1.96), abs=1e-6)

    def test_t_known_value(self):
        """Test the t(10) tail at its 0.975 quantile."""
        # t = 2.228 is the 0.975 quantile of t(10)
        assert float(t_two_sided_p(2.228, 10)) == pytest.approx(0.05, abs=2e-4)

    def test_chi2_known_value(self):
        """Test the chi-square tail at x = 10 with 5 df."""
        assert chi2_sf(10.0, 5) == pytest.approx(0.0752, abs=1e-4)

    @pytest.mark.parametrize("x, df", [(10.0, 5), (3.84, 1), (25.0, 12), (0.5, 2), (40.0, 30)])
    def test_chi2_matches_quadrature(self, x, df):
        """Test the chi-square tail against direct integration of the density."""
        assert chi2_sf(x, df) == pytest.approx(_chi2_tail_by_quadrature(x, df), abs=1e-8)

    def test_chi2_zero_df(self):
        """Test that zero degrees of freedom give p = 1."""
        assert chi2_sf(3.0, 0) == 1.0

    def test_critical_z(self):
        """Test the two-sided 95% critical value."""
        assert critical_z(0.95) == pytest.approx(1.959964, abs=1e-6)

    def test_invalid_level(self):
        """Test that a level of 1 is refused."""
        with pytest.raises(InvalidLevelError):
            check_level(1.0)

    def test_invalid_alpha(self):
        """Test that an alpha of 0 is refused."""
        with pytest.raises(InvalidAlphaError):
            check_alpha(0.0)

    def test_kurtosis_of_normal_sample(self):
        """Test that a large normal sample has excess kurtosis near zero."""
        x = np.random.default_rng(1).normal(size=200_000)

        assert excess_kurtosis(x) == pytest.approx(0.0, abs=0.05)

    def test_kurtosis_moment_estimator(self):
        """Test the m4 / m2^2 - 3 moment form on a small sample."""
        x = np.array([1.0, 2.0, 3.0, 4.0, 10.0])
        dev = x - x.mean()

        expected = np.mean(dev**4) / np.mean(dev**2) ** 2 - 3.0

        assert excess_kurtosis(x) == pytest.approx(expected, rel=1e-12)
