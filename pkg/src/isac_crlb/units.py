"""Unit conversions and ESNR bookkeeping.

Everything inside the package is linear (Hz, s, rad, power ratios). dB
only appears at the configuration boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

from isac_crlb.errors import ConfigurationError

if TYPE_CHECKING:
    from isac_crlb.waveform import WaveformSpec

C0 = 299_792_458.0  # m/s, vacuum


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        raise ValueError(f"linear power ratio must be positive, got {x}")
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class EsnrLinear:
    """Energy SNR ``A**2 * E_s / sigma2`` at one receive element."""

    value: float

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError(f"ESNR must be positive, got {self.value}")

    @classmethod
    def from_db(cls, gamma_db: float) -> "EsnrLinear":
        return cls(db_to_linear(gamma_db))

    @property
    def db(self) -> float:
        return linear_to_db(self.value)

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class CarrierConfig:
    f_c: float
    c0: float = C0

    def __post_init__(self):
        if not self.f_c > 0:
            raise ValueError(f"carrier frequency must be positive, got {self.f_c}")

    @property
    def wavelength(self) -> float:
        return self.c0 / self.f_c


def esnr_from_snr(
    snr: float, waveform: "WaveformSpec", n_samples: int | None = None
) -> EsnrLinear:
    """Per-sample SNR to energy SNR, ``gamma = N_s * snr``.

    The sample count follows the receiver's natural sampling: one sample
    per chip for PMCW and one per ``1/B`` for OFDM/OTFS. FMCW sampling is
    decoupled from the sweep bandwidth, so its ``n_samples`` must be given.
    An explicit ``n_samples`` overrides the default for every family.
    """
    if not snr > 0:
        raise ValueError(f"snr must be positive, got {snr}")
    if n_samples is None:
        n_samples = waveform.natural_sample_count()
    if n_samples is None:
        raise ConfigurationError(
            f"{type(waveform).__name__} needs an explicit sample count to convert SNR to ESNR"
        )
    return EsnrLinear(n_samples * snr)


def crlb_delay_to_range(c_tau: float) -> float:
    """Monostatic range bound in m**2 from a delay bound in s**2."""
    if c_tau < 0:
        raise ValueError("delay bound must be non-negative")
    return (C0 / 2.0) ** 2 * c_tau


def crlb_doppler_to_velocity(c_fd: float, cfg: CarrierConfig) -> float:
    """Radial-velocity bound in (m/s)**2 from a Doppler bound in Hz**2."""
    if c_fd < 0:
        raise ValueError("Doppler bound must be non-negative")
    if not cfg.f_c > 0:
        raise ValueError("carrier frequency must be positive")
    return (cfg.c0 / (2.0 * cfg.f_c)) ** 2 * c_fd
