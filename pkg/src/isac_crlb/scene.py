"""True-parameter description of a single-target scene."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from isac_crlb.errors import ConfigurationError

# |cos(theta)| below this is treated as an exact endfire null
_ENDFIRE_COS = 1e-12


@dataclass(frozen=True)
class ArrayConfig:
    """Transmit/receive ULAs. Spacings are in wavelengths."""

    N_T: int = 1
    N_R: int = 1
    d_T: float = 0.5
    d_R: float = 0.5
    wavelength: float = 1.0

    def __post_init__(self):
        if self.N_T < 1 or self.N_R < 1:
            raise ConfigurationError("array sizes must be >= 1")

    def rx_positions(self) -> np.ndarray:
        """Receive element positions in wavelengths."""
        return self.d_R * np.arange(self.N_R, dtype=float)


@dataclass(frozen=True)
class SceneParams:
    """Signal-level parameters ``[A, phi, tau, f_D, theta_R]`` plus noise.

    ``A`` already contains the transmit beamforming gain, ``A = N_T * a``.
    ``positions`` optionally overrides the receive element positions (in
    wavelengths); the virtual-array code uses it to place virtual elements.
    """

    A: float = 1.0
    phi: float = 0.0
    tau: float = 0.0
    f_D: float = 0.0
    theta_R: float = 0.0
    sigma2: float = 1.0
    array: ArrayConfig = ArrayConfig()
    positions: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ConfigurationError("noise power sigma2 must be positive")
        if abs(self.theta_R) > math.pi / 2:
            raise ConfigurationError("theta_R must lie in [-pi/2, pi/2]")

    @property
    def n_elements(self) -> int:
        return self.array.N_R if self.positions is None else len(self.positions)

    def element_positions(self) -> np.ndarray:
        if self.positions is not None:
            return np.asarray(self.positions, dtype=float)
        return self.array.rx_positions()

    def cos_theta(self) -> float:
        c = math.cos(self.theta_R)
        return 0.0 if abs(c) < _ENDFIRE_COS else c

    def steering_conj(self) -> np.ndarray:
        """``a_R^*(theta_R)``, one entry per receive element."""
        p = self.element_positions()
        return np.exp(-2j * np.pi * p * math.sin(self.theta_R))

    def steering_conj_derivative(self) -> np.ndarray:
        p = self.element_positions()
        return -2j * np.pi * p * self.cos_theta() * self.steering_conj()

    def with_(self, **changes) -> "SceneParams":
        return replace(self, **changes)

    @classmethod
    def from_esnr(
        cls, gamma: float, energy: float, sigma2: float = 1.0, **kwargs
    ) -> "SceneParams":
        """Pick the amplitude that realizes ESNR ``gamma`` for a signal of given energy."""
        if not gamma > 0 or not energy > 0:
            raise ConfigurationError("ESNR and signal energy must be positive")
        return cls(A=math.sqrt(gamma * sigma2 / energy), sigma2=sigma2, **kwargs)

    def esnr(self, energy: float) -> float:
        return self.A**2 * energy / self.sigma2
