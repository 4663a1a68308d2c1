"""Receiver noise: shot and thermal photocurrent variance."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigurationError, ParameterError

ELEMENTARY_CHARGE = 1.602176634e-19  # C
BOLTZMANN = 1.380649e-23             # J/K


@dataclass(frozen=True)
class NoiseModel:
    """Additive Gaussian receiver noise parameters.

    The defaults are engineering values for a 10 GHz front end; they are
    deliberately configuration-level knobs, not physical constants.
    """

    background_current: float = 1e-4  # A, ambient-light photocurrent
    temperature: float = 298.0        # K
    load_resistance: float = 50.0     # ohm
    bandwidth: float = 10e9           # Hz

    def __post_init__(self):
        for name in ("background_current", "temperature",
                     "load_resistance", "bandwidth"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"noise {name} must be > 0")


def noise_variance(model: NoiseModel, rx_responsivity: float,
                   received_optical_power: float) -> float:
    """Photocurrent noise variance in A^2.

    shot:    2 q (R P_rx + I_bg) B
    thermal: 4 k_B T B / R_L
    """
    if received_optical_power < 0:
        raise ParameterError("received_optical_power must be >= 0")
    shot = (
        2.0 * ELEMENTARY_CHARGE
        * (rx_responsivity * received_optical_power + model.background_current)
        * model.bandwidth
    )
    thermal = (
        4.0 * BOLTZMANN * model.temperature * model.bandwidth
        / model.load_resistance
    )
    return shot + thermal
