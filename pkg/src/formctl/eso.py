"""Per-agent extended state observer and its frequency-domain residual.

The observer treats the unknown disturbance as an extra state and estimates
it from the velocity measurement. It acts independently on every scalar axis,
so one parameter set per agent covers all axes. The derivative function is
pure; observer state is owned by the integration loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .riccati import PlantParams


@dataclass
class EsoParams:
    """Observer bandwidth constants.

    The documented parameterization is a single bandwidth sigma with
    beta_g = 2*sigma and beta_z = sigma**2, which places both error poles at
    -sigma (critically damped). Raw constants are accepted too.
    """

    beta_g: float
    beta_z: float

    def __post_init__(self):
        if self.beta_g <= 0 or self.beta_z <= 0:
            raise ValueError("observer bandwidth constants must be positive")

    @classmethod
    def from_sigma(cls, sigma: float) -> "EsoParams":
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        return cls(beta_g=2.0 * sigma, beta_z=sigma * sigma)


@dataclass
class EsoState:
    """Observer state for one agent: velocity estimate g and disturbance estimate z."""

    g: np.ndarray
    z: np.ndarray


def eso_derivative(
    state: EsoState,
    p: np.ndarray,
    v: np.ndarray,
    u: np.ndarray,
    params: EsoParams,
    plant: PlantParams,
):
    """Time derivative (dg, dz) of one agent's observer.

    dg = z + u + alpha_p*p + alpha_v*v - beta_g*(g - v)
    dz = -beta_z*(g - v)
    """
    err = state.g - v
    dg = state.z + u + plant.alpha_p * p + plant.alpha_v * v - params.beta_g * err
    dz = -params.beta_z * err
    return dg, dz


def residual_gain(sigma: float, omega_freq: float) -> complex:
    """Complex disturbance-to-residual gain 1 - G(j*omega) of the observer.

    G(s) = sigma^2 / (s + sigma)^2 is the disturbance-to-estimate transfer
    function under the sigma parameterization, so the returned value predicts
    the steady-state residual of a unit sinusoidal disturbance at
    ``omega_freq``. Zero at DC; approaches one far above the bandwidth.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    s = 1j * omega_freq
    return 1.0 - sigma * sigma / (s + sigma) ** 2
