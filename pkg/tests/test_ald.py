import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st
from scipy import integrate, stats

from vcselect.ald import ald_constants, ald_log_density, check_loss
from vcselect.errors import ConfigurationError

taus = st.floats(min_value=0.01, max_value=0.99)


@pytest.mark.parametrize("residual,expected", [(2.0, 0.6), (-2.0, 1.4), (0.0, 0.0)])
def test_check_loss(residual, expected):
    assert check_loss(residual, 0.3) == pytest.approx(expected)


@given(st.floats(-1e6, 1e6), taus)
def test_check_loss_is_non_negative(residual, tau):
    assert check_loss(residual, tau) >= 0.0


def test_check_loss_is_vectorized():
    np.testing.assert_allclose(check_loss(np.array([2.0, -2.0]), 0.3), [0.6, 1.4])


@pytest.mark.parametrize("tau,kappa1,kappa2_sq", [
    (0.5, 0.0, 8.0),
    (0.3, 0.4 / 0.21, 2 / 0.21),
    (0.7, -0.4 / 0.21, 2 / 0.21),
])
def test_ald_constants(tau, kappa1, kappa2_sq):
    c = ald_constants(tau)
    assert c.kappa1 == pytest.approx(kappa1)
    assert c.kappa2_sq == pytest.approx(kappa2_sq)


@given(taus)
def test_latent_update_constants(tau):
    c = ald_constants(tau)
    assert c.u_mean_numerator / c.kappa2_sq == pytest.approx(c.u_shape_factor)


@pytest.mark.parametrize("tau", [0.0, 1.0, -0.2, 1.5])
def test_invalid_tau(tau):
    with pytest.raises(ConfigurationError):
        ald_constants(tau)


def test_log_density_at_zero():
    assert ald_log_density(0.0, 1.0, 0.5) == pytest.approx(np.log(0.25))


def test_log_density_rejects_non_positive_theta():
    with pytest.raises(ConfigurationError):
        ald_log_density(0.0, 0.0, 0.5)


def test_density_integrates_to_one():
    def density(e):
        return np.exp(ald_log_density(e, 2.0, 0.3))

    total = integrate.quad(density, -np.inf, 0.0)[0] + integrate.quad(density, 0.0, np.inf)[0]
    assert total == pytest.approx(1.0, abs=1e-8)


def test_tau_quantile_is_zero():
    below = integrate.quad(lambda e: np.exp(ald_log_density(e, 1.5, 0.3)), -np.inf, 0.0)[0]
    assert below == pytest.approx(0.3, abs=1e-8)


def test_mixture_representation_matches_ald():
    tau, theta = 0.3, 2.0
    c = ald_constants(tau)
    rng = np.random.default_rng(3)
    u = rng.exponential(1.0 / theta, 100_000)
    draws = c.kappa1 * u + np.sqrt(c.kappa2_sq * u / theta) * rng.standard_normal(u.shape[0])

    def cdf(e):
        e = np.asarray(e)
        return np.where(e < 0, tau * np.exp(theta * (1 - tau) * e), 1 - (1 - tau) * np.exp(-theta * tau * e))

    assert stats.kstest(draws, cdf).pvalue > 1e-3
