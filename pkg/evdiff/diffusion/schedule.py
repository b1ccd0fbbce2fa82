from dataclasses import dataclass

import numpy as np

from evdiff import custom_logger


@dataclass(frozen=True)
class NoiseSchedule:
    """Decreasing noise levels sigma_T > ... > sigma_1 > sigma_0 = 0."""

    sigmas: np.ndarray
    sigma_data: float = 0.5

    def __post_init__(self):
        sigmas = np.asarray(self.sigmas, dtype=np.float64)
        object.__setattr__(self, "sigmas", sigmas)
        if sigmas.ndim != 1 or sigmas.size < 2:
            raise ValueError("A schedule needs at least one step")
        if sigmas[-1] != 0.0:
            raise ValueError("The last sigma must be exactly 0")
        if np.any(sigmas < 0) or np.any(np.diff(sigmas) >= 0):
            raise ValueError("Sigmas must be non-negative and strictly decreasing")
        if not self.sigma_data > 0:
            raise ValueError(f"sigma_data must be > 0, got {self.sigma_data}")

    @property
    def steps(self):
        return self.sigmas.size - 1

    @property
    def sigma_max(self):
        return float(self.sigmas[0])

    def lambda_at(self, i):
        return lambda_weight(self.sigmas[i], self.sigma_data)

    def alpha_at(self, i, scale=1.0):
        return alpha_weight(self.sigmas[i], scale)


def make_schedule(sigma_min=0.002, sigma_max=80.0, steps=30, rho=7.0, sigma_data=0.5) -> NoiseSchedule:
    """Power-warped (rho) interpolation from sigma_max down to sigma_min, then 0."""
    if not 0 < sigma_min < sigma_max:
        raise ValueError(f"Need 0 < sigma_min < sigma_max, got {sigma_min}, {sigma_max}")
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if not rho > 0:
        raise ValueError(f"rho must be > 0, got {rho}")

    if steps == 1:
        sigmas = np.array([sigma_max])
    else:
        ramp = np.arange(steps, dtype=np.float64) / (steps - 1)
        inv_max, inv_min = sigma_max ** (1.0 / rho), sigma_min ** (1.0 / rho)
        sigmas = (inv_max + ramp * (inv_min - inv_max)) ** rho
        sigmas[0], sigmas[-1] = sigma_max, sigma_min
    schedule = NoiseSchedule(np.append(sigmas, 0.0), sigma_data)
    custom_logger.debug(f"Noise schedule: {steps} steps, sigma {sigma_max} -> {sigma_min}, rho={rho}")
    return schedule


def lambda_weight(sigma, sigma_data):
    """(sigma^2 + sigma_data^2) / (sigma + sigma_data)^2, in (0, 1]."""
    return (sigma ** 2 + sigma_data ** 2) / (sigma + sigma_data) ** 2


def alpha_weight(sigma, scale=1.0):
    """1 - exp(-sigma / scale)."""
    return -np.expm1(-np.asarray(sigma, dtype=np.float64) / scale)


def c_skip(sigma, sigma_data):
    return sigma_data ** 2 / (sigma ** 2 + sigma_data ** 2)


def c_noise(sigma):
    return np.log(sigma) / 4.0
