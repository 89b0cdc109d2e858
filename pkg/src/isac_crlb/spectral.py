"""Power spectra, RMS bandwidth/time, and pulse-shape RMS bandwidths."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import fft as sfft
from scipy.integrate import quad

from isac_crlb.errors import ConfigurationError
from isac_crlb.waveform import RC, RRC, PulseShape, Rect, SampledSignal, Sinc


@dataclass(frozen=True, eq=False)
class PowerSpectrum:
    """Energy spectral density ``|S(f)|**2`` on a grid symmetric about 0 Hz."""

    bins: np.ndarray
    df: float
    f_start: float

    @property
    def freqs(self) -> np.ndarray:
        return self.f_start + self.df * np.arange(self.bins.size)

    @property
    def energy(self) -> float:
        return float(self.bins.sum() * self.df)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["f_hz", "psd"])
            for f, p in zip(self.freqs, self.bins):
                w.writerow([repr(float(f)), repr(float(p))])


def power_spectrum(sig: SampledSignal, n_fft: int | None = None) -> PowerSpectrum:
    """Periodogram of the whole sampled signal, scaled so ``df * sum = E_s``.

    For even lengths the Nyquist bin is split evenly between ``-fs/2`` and
    ``+fs/2`` so the returned grid is exactly symmetric.
    """
    s = sig.samples
    if s.size == 0:
        raise ValueError("empty signal")
    n = s.size if n_fft is None else int(n_fft)
    S = sfft.fftshift(sfft.fft(s, n)) / sig.fs
    p = np.abs(S) ** 2
    df = sig.fs / n
    if n % 2 == 0:
        p = np.concatenate([[p[0] / 2], p[1:], [p[0] / 2]])
    return PowerSpectrum(p, df, -df * (p.size // 2))


def rms_bandwidth_sq(ps: PowerSpectrum) -> float:
    """Second moment of the normalized spectrum about 0 Hz (not about its mean)."""
    total = ps.bins.sum()
    if not total > 0:
        raise ValueError("spectrum carries no energy")
    return float(np.dot(ps.freqs**2, ps.bins) / total)


def rms_time_sq(sig: SampledSignal) -> float:
    """Second moment of ``|s(t)|**2`` about ``t = 0`` on the signal's own axis."""
    p = np.abs(sig.samples) ** 2
    total = p.sum()
    if not total > 0:
        raise ValueError("signal carries no energy")
    return float(np.dot(sig.t**2, p) / total)


def smooth_bins(bins: np.ndarray, width: int = 32) -> np.ndarray:
    """Centred moving average; tames the periodogram variance of random data."""
    if width <= 1:
        return np.asarray(bins, dtype=float)
    return np.convolve(bins, np.ones(width) / width, mode="same")


def spectrum_symmetry_defect(ps: PowerSpectrum, smooth: int = 1) -> float:
    """``sum_{f>0} | |S(f)|^2 - |S(-f)|^2 | / sum_f |S(f)|^2``.

    Zero for an even spectrum, one for a spectrum living entirely on one side.
    ``smooth > 1`` applies a moving average first (use an odd width to keep
    the grid centred).
    """
    n = ps.bins.size
    if n % 2 == 0 or not math.isclose(ps.f_start, -ps.df * (n // 2), rel_tol=1e-9):
        raise ValueError("spectrum grid is not symmetric about 0 Hz")
    bins = smooth_bins(ps.bins, smooth)
    half = n // 2
    pos = bins[half + 1 :]
    neg = bins[:half][::-1]
    return float(np.abs(pos - neg).sum() / bins.sum())


def si(x: float) -> float:
    """Sine integral ``int_0^x sin(t)/t dt`` by adaptive Gauss-Kronrod quadrature."""
    if x == 0:
        return 0.0
    val, _ = quad(lambda t: np.sinc(t / np.pi), 0.0, x, epsabs=1e-10, epsrel=1e-12, limit=200)
    return float(val)


def pulse_rms_bandwidth_sq(pulse: PulseShape, T_c: float) -> float:
    """Closed-form ``B_rms**2`` of one chip, in Hz**2.

    Rect keeps only the spectral main lobe ``|f| <= 1/T_c``.
    """
    if not T_c > 0:
        raise ConfigurationError("chip period must be positive")
    if isinstance(pulse, Rect):
        return 1.0 / (2 * math.pi * T_c**2 * si(2 * math.pi))
    if isinstance(pulse, Sinc):
        return 1.0 / (12 * T_c**2)
    pi2 = math.pi**2
    if isinstance(pulse, RRC):
        a = pulse.alpha
        return ((3 * pi2 - 24) * a**2 + pi2) / (12 * pi2 * T_c**2)
    if isinstance(pulse, RC):
        a = pulse.alpha
        if a == 0:
            raise ConfigurationError("RC with zero roll-off is the sinc pulse")
        num = (6 - pi2) * a**3 + (12 * pi2 - 96) * a**2 - 3 * pi2 * a + 4 * pi2
        return num / ((48 - 12 * a) * pi2 * T_c**2)
    raise ConfigurationError(f"unknown pulse {pulse!r}")


def pulse_delay_factor(pulse: PulseShape) -> float:
    """Delay-CRLB penalty of a pulse relative to the ideal flat spectrum, ``(B^2/12)/B_rms^2``."""
    t_c = 1.0
    b = pulse.bandwidth(t_c)
    return (b**2 / 12) / pulse_rms_bandwidth_sq(pulse, t_c)


def sampled_pulse(pulse: PulseShape, T_c: float, fs: float) -> SampledSignal:
    """The truncated pulse sampled symmetrically about its peak."""
    h = pulse.half_support(T_c)
    n = int(math.floor(h * fs))
    t = np.arange(-n, n + 1) / fs
    g = pulse.impulse(t, T_c) * (np.abs(t) <= h)
    return SampledSignal(g.astype(complex), fs, t0_offset=float(t[0]))


def numeric_pulse_rms_bandwidth_sq(
    pulse: PulseShape, T_c: float, fs: float, pad: int = 8
) -> float:
    """``B_rms**2`` of the truncated, sampled pulse via a zero-padded FFT.

    The raw rectangular chip is not band-limited; for it only the main lobe
    ``|f| <= 1/T_c`` enters, as in the closed form.
    """
    sig = sampled_pulse(pulse, T_c, fs)
    ps = power_spectrum(sig, n_fft=sfft.next_fast_len(pad * len(sig)))
    if isinstance(pulse, Rect) and not pulse.mainlobe_only:
        keep = np.abs(ps.freqs) <= 1.0 / T_c
        ps = PowerSpectrum(np.where(keep, ps.bins, 0.0), ps.df, ps.f_start)
    return rms_bandwidth_sq(ps)
