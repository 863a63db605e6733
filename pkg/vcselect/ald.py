from dataclasses import dataclass

import numpy as np

from vcselect.errors import ConfigurationError


def validate_tau(tau: float) -> float:
    if not 0.0 < tau < 1.0:
        raise ConfigurationError(f'quantile level must lie in (0, 1), got {tau}')
    return float(tau)


@dataclass(frozen=True)
class AldConstants:
    """Location-scale mixture constants of the asymmetric Laplace working likelihood."""
    tau: float
    kappa1: float
    kappa2_sq: float

    @property
    def u_mean_numerator(self) -> float:
        # kappa1^2 + 2 kappa2^2 feeds the inverse-Gaussian mean of 1/u_tilde
        return self.kappa1 ** 2 + 2.0 * self.kappa2_sq

    @property
    def u_shape_factor(self) -> float:
        # theta * (kappa1^2 / kappa2^2 + 2) is the inverse-Gaussian shape of 1/u_tilde
        return self.kappa1 ** 2 / self.kappa2_sq + 2.0


def ald_constants(tau: float) -> AldConstants:
    tau = validate_tau(tau)
    kappa1 = (1.0 - 2.0 * tau) / (tau * (1.0 - tau))
    kappa2_sq = 2.0 / (tau * (1.0 - tau))
    return AldConstants(tau=tau, kappa1=kappa1, kappa2_sq=kappa2_sq)


def check_loss(residual, tau: float):
    """rho_tau(e) = e (tau - 1{e < 0}); vectorized."""
    residual = np.asarray(residual, dtype=float)
    loss = residual * (tau - (residual < 0))
    return loss if loss.ndim else float(loss)


def ald_log_density(residual, theta: float, tau: float):
    if theta <= 0:
        raise ConfigurationError(f'theta must be positive, got {theta}')
    tau = validate_tau(tau)
    return np.log(tau * (1.0 - tau) * theta) - theta * check_loss(residual, tau)
