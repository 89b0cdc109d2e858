"""Sampled complex-baseband realizations of FMCW, PMCW, OFDM and OTFS frames.

All synthesized signals live on a sample grid whose time axis is shifted so
that the discrete energy centroid sits at ``t = 0``.  The shift that was
removed (the centroid measured from the start of the frame) is kept as
``SampledSignal.frame_centroid``; it is the ``T_0`` that appears in the
Doppler/phase cross terms of the Fisher information.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from scipy import fft as sfft
from scipy.special import sici

from isac_crlb.errors import ConfigurationError, SamplingError, TruncationError
from isac_crlb.scene import SceneParams

OVERSAMPLE = 4
PULSE_TRUNCATION = 8  # chip periods on each side of a band-limited pulse
_SI_2PI = float(sici(2 * np.pi)[0])
_INT_TOL = 1e-9


# --------------------------------------------------------------------------
# pulse shapes
# --------------------------------------------------------------------------
# Every pulse is scaled to carry energy T_c (unit average power per chip).


@dataclass(frozen=True)
class Rect:
    """Rectangular chip.

    With ``mainlobe_only`` (the default) the spectral sidelobes beyond
    ``|f| = 1/T_c`` are removed, which is what gives the pulse its
    bandwidth ``B = 2/T_c``.  The raw, constant-envelope chip is available
    with ``mainlobe_only=False``; its spectrum is not band-limited.
    """

    mainlobe_only: bool = True

    def chip_period(self, bandwidth: float) -> float:
        return 2.0 / bandwidth

    def bandwidth(self, t_c: float) -> float:
        return 2.0 / t_c

    def half_support(self, t_c: float) -> float:
        return PULSE_TRUNCATION * t_c if self.mainlobe_only else 0.5 * t_c

    def impulse(self, t: np.ndarray, t_c: float) -> np.ndarray:
        x = np.asarray(t, dtype=float) / t_c
        if not self.mainlobe_only:
            return ((x >= -0.5) & (x < 0.5)).astype(float)
        # inverse transform of T_c sinc(f T_c) on |f| <= 1/T_c
        g = (sici(np.pi * (1 + 2 * x))[0] + sici(np.pi * (1 - 2 * x))[0]) / np.pi
        return g / math.sqrt(2 * _SI_2PI / np.pi)

    def spectrum(self, f: np.ndarray, t_c: float) -> np.ndarray:
        """``|G(f)|**2 / T_c``; integrates to one."""
        x = np.asarray(f, dtype=float) * t_c
        p = t_c * np.sinc(x) ** 2
        if self.mainlobe_only:
            p = np.where(np.abs(x) <= 1.0, p, 0.0) / (2 * _SI_2PI / np.pi)
        return p


@dataclass(frozen=True)
class Sinc:
    def chip_period(self, bandwidth: float) -> float:
        return 1.0 / bandwidth

    def bandwidth(self, t_c: float) -> float:
        return 1.0 / t_c

    def half_support(self, t_c: float) -> float:
        return PULSE_TRUNCATION * t_c

    def impulse(self, t, t_c):
        return np.sinc(np.asarray(t, dtype=float) / t_c)

    def spectrum(self, f, t_c):
        x = np.abs(np.asarray(f, dtype=float)) * t_c
        return np.where(x <= 0.5, t_c, 0.0)


@dataclass(frozen=True)
class RRC:
    """Root-raised-cosine chip with roll-off ``alpha``."""

    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigurationError(f"roll-off must lie in [0, 1], got {self.alpha}")

    def chip_period(self, bandwidth):
        return (1.0 + self.alpha) / bandwidth

    def bandwidth(self, t_c):
        return (1.0 + self.alpha) / t_c

    def half_support(self, t_c):
        return PULSE_TRUNCATION * t_c

    def impulse(self, t, t_c):
        a = self.alpha
        x = np.asarray(t, dtype=float) / t_c
        out = np.empty_like(x)
        at_zero = np.abs(x) < 1e-12
        at_pole = np.zeros_like(at_zero) if a == 0 else np.abs(np.abs(x) - 1 / (4 * a)) < 1e-9
        rest = ~(at_zero | at_pole)
        xr = x[rest]
        num = np.sin(np.pi * xr * (1 - a)) + 4 * a * xr * np.cos(np.pi * xr * (1 + a))
        out[rest] = num / (np.pi * xr * (1 - (4 * a * xr) ** 2))
        out[at_zero] = 1 - a + 4 * a / np.pi
        if a > 0:
            q = np.pi / (4 * a)
            out[at_pole] = a / math.sqrt(2) * (
                (1 + 2 / np.pi) * math.sin(q) + (1 - 2 / np.pi) * math.cos(q)
            )
        return out

    def spectrum(self, f, t_c):
        return _raised_cosine_shape(np.asarray(f, dtype=float), t_c, self.alpha) * t_c


@dataclass(frozen=True)
class RC:
    """Raised-cosine chip; ``alpha`` must be positive (use ``Sinc`` for 0)."""

    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigurationError(
                f"RC roll-off must lie in (0, 1], got {self.alpha}; use Sinc for alpha=0"
            )

    def chip_period(self, bandwidth):
        return (1.0 + self.alpha) / bandwidth

    def bandwidth(self, t_c):
        return (1.0 + self.alpha) / t_c

    def half_support(self, t_c):
        return PULSE_TRUNCATION * t_c

    def impulse(self, t, t_c):
        a = self.alpha
        x = np.asarray(t, dtype=float) / t_c
        den = 1 - (2 * a * x) ** 2
        at_pole = np.abs(den) < 1e-9
        safe = np.where(at_pole, 1.0, den)
        out = np.sinc(x) * np.cos(np.pi * a * x) / safe
        out = np.where(at_pole, np.pi / 4 * np.sinc(1 / (2 * a)), out)
        return out / math.sqrt(1 - a / 4)

    def spectrum(self, f, t_c):
        shape = _raised_cosine_shape(np.asarray(f, dtype=float), t_c, self.alpha)
        return shape**2 * t_c / (1 - self.alpha / 4)


PulseShape = Union[Rect, Sinc, RRC, RC]


def _raised_cosine_shape(f, t_c, alpha):
    """Raised-cosine spectral shape with unit passband."""
    af = np.abs(f)
    f_lo = (1 - alpha) / (2 * t_c)
    f_hi = (1 + alpha) / (2 * t_c)
    out = np.where(af <= f_lo, 1.0, 0.0)
    if alpha > 0:
        band = (af > f_lo) & (af <= f_hi)
        out = np.where(band, 0.5 * (1 + np.cos(np.pi * t_c / alpha * (af - f_lo))), out)
    return out


# --------------------------------------------------------------------------
# waveform descriptions
# --------------------------------------------------------------------------


def _as_pm1(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise ConfigurationError(f"{name} is empty")
    if not np.all(np.abs(arr) == 1.0):
        raise ConfigurationError(f"{name} must contain only +1/-1")
    return arr


@dataclass(frozen=True, eq=False)
class FMCW:
    """Chirp train with sweep ``B`` over each PRI ``T``.

    ``data`` holds one unit-modulus symbol per chirp; all ones when omitted.
    """

    B: float
    T: float
    K: int
    data: np.ndarray | None = None

    def __post_init__(self):
        if self.K < 1 or not self.T > 0 or self.B < 0:
            raise ConfigurationError("FMCW needs K >= 1, T > 0 and B >= 0")
        data = np.ones(self.K, complex) if self.data is None else np.asarray(self.data, complex).ravel()
        if data.size == 0:
            raise ConfigurationError("FMCW data is empty")
        if data.size != self.K:
            raise ConfigurationError(f"FMCW expects {self.K} chirp symbols, got {data.size}")
        if not np.allclose(np.abs(data), 1.0, atol=1e-12):
            raise ConfigurationError("FMCW chirp symbols must be unit-modulus")
        object.__setattr__(self, "data", data)

    @property
    def bandwidth(self) -> float:
        return self.B

    @property
    def slope(self) -> float:
        return self.B / self.T

    @property
    def frame_length(self) -> float:
        return self.K * self.T

    def natural_sample_count(self):
        return None

    def pri_samples(self, fs: float) -> float:
        return self.T * fs


@dataclass(frozen=True, eq=False)
class PMCW:
    """Binary phase-coded train: ``K`` PRIs of an ``L``-chip code."""

    pulse: PulseShape
    T_c: float
    code: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        if not self.T_c > 0:
            raise ConfigurationError("chip period must be positive")
        object.__setattr__(self, "code", _as_pm1(self.code, "PMCW code"))
        object.__setattr__(self, "data", _as_pm1(self.data, "PMCW data"))

    @property
    def L(self) -> int:
        return self.code.size

    @property
    def K(self) -> int:
        return self.data.size

    @property
    def T(self) -> float:
        return self.L * self.T_c

    @property
    def bandwidth(self) -> float:
        return self.pulse.bandwidth(self.T_c)

    @property
    def frame_length(self) -> float:
        return self.K * self.T

    def chips(self) -> np.ndarray:
        return np.outer(self.data, self.code).ravel()

    def natural_sample_count(self):
        # one sample per chip
        return self.K * self.L

    def pri_samples(self, fs):
        return self.T * fs


class _MultiCarrier:
    """Frame geometry shared by OFDM and OTFS (``delta_f``, ``L``, ``K``, ``L_cp``)."""

    @property
    def T(self) -> float:
        return 1.0 / self.delta_f

    @property
    def T_cp(self) -> float:
        return self.T * self.L_cp / self.L

    @property
    def T_s(self) -> float:
        return self.T + self.T_cp

    @property
    def bandwidth(self) -> float:
        return self.L * self.delta_f

    @property
    def frame_length(self) -> float:
        return self.K * self.T_s

    @property
    def f0(self) -> float:
        return self.delta_f * (self.L - 1) / 2

    def natural_sample_count(self):
        # sampling at 1/B
        return int(round(self.bandwidth * self.frame_length))

    def pri_samples(self, fs):
        return self.T_s * fs


@dataclass(frozen=True, eq=False)
class OFDM(_MultiCarrier):
    """CP-OFDM frame; ``symbols`` is the ``K x L`` (symbol, subcarrier) grid."""

    delta_f: float
    symbols: np.ndarray
    L_cp: int = 0

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.symbols, dtype=complex))
        if X.size == 0:
            raise ConfigurationError("OFDM symbol grid is empty")
        if not self.delta_f > 0 or self.L_cp < 0:
            raise ConfigurationError("OFDM needs delta_f > 0 and L_cp >= 0")
        object.__setattr__(self, "symbols", X)

    @property
    def K(self) -> int:
        return self.symbols.shape[0]

    @property
    def L(self) -> int:
        return self.symbols.shape[1]

    def tf_grid(self) -> np.ndarray:
        return self.symbols


@dataclass(frozen=True, eq=False)
class OTFS(_MultiCarrier):
    """OTFS frame; ``dd_symbols`` is the ``L x K`` (delay, Doppler) grid."""

    delta_f: float
    dd_symbols: np.ndarray
    L_cp: int = 0

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.dd_symbols, dtype=complex))
        if x.size == 0:
            raise ConfigurationError("OTFS delay-Doppler grid is empty")
        object.__setattr__(self, "dd_symbols", x)

    @property
    def L(self) -> int:
        return self.dd_symbols.shape[0]

    @property
    def K(self) -> int:
        return self.dd_symbols.shape[1]

    def as_ofdm(self) -> OFDM:
        return OFDM(self.delta_f, otfs_to_tf(self.dd_symbols), self.L_cp)

    def tf_grid(self) -> np.ndarray:
        return otfs_to_tf(self.dd_symbols)


WaveformSpec = Union[FMCW, PMCW, OFDM, OTFS]


def otfs_to_tf(dd_symbols: np.ndarray) -> np.ndarray:
    """ISFFT of an ``L x K`` delay-Doppler grid into the ``K x L`` time-frequency grid.

    ``X[k, l] = 1/sqrt(KL) * sum_{nu, mu} x[mu, nu] exp(j2pi (k nu/K - l mu/L))``
    """
    x = np.asarray(dd_symbols, dtype=complex)
    if x.ndim != 2:
        raise ConfigurationError("delay-Doppler grid must be two-dimensional")
    X = sfft.fft(sfft.ifft(x, axis=1, norm="ortho"), axis=0, norm="ortho")
    return X.T


def m_sequence(taps: Sequence[int]) -> np.ndarray:
    """Maximal-length +-1 sequence from a Fibonacci LFSR.

    ``taps`` are the exponents of the feedback polynomial, e.g. ``(3, 2)``
    for ``x^3 + x^2 + 1``; the register length is ``max(taps)``.
    """
    taps = sorted({int(t) for t in taps}, reverse=True)
    if not taps or taps[-1] < 1:
        raise ConfigurationError("LFSR taps must be positive exponents")
    m = taps[0]
    state = [1] * m
    out = np.empty(2**m - 1, dtype=float)
    for i in range(out.size):
        out[i] = state[-1]
        fb = 0
        for t in taps:
            fb ^= state[t - 1]
        state = [fb] + state[:-1]
    return 1.0 - 2.0 * out


# --------------------------------------------------------------------------
# sampled signals
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Uniformly sampled complex baseband signal.

    Sample ``n`` sits at ``t0_offset + n/fs`` on the centroid-shifted axis.
    ``guard`` is the zero padding (in seconds) on each side of the frame.
    """

    samples: np.ndarray
    fs: float
    t0_offset: float
    energy: float | None = None
    frame_centroid: float = 0.0
    guard: float = 0.0

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex, copy=True)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        if self.energy is None:
            object.__setattr__(self, "energy", float(np.vdot(s, s).real) / self.fs)

    def __len__(self):
        return self.samples.size

    @property
    def dt(self) -> float:
        return 1.0 / self.fs

    @property
    def t(self) -> np.ndarray:
        return self.t0_offset + np.arange(self.samples.size) / self.fs

    @property
    def centroid(self) -> float:
        p = np.abs(self.samples) ** 2
        return float(np.dot(self.t, p) / p.sum())

    def derivative(self) -> np.ndarray:
        """Spectral derivative ``ds/dt`` of the band-limited interpolant."""
        return spectral_derivative(self.samples, self.fs)

    def replace_samples(self, samples: np.ndarray) -> "SampledSignal":
        """Same time axis, new samples (energy recomputed)."""
        return SampledSignal(
            samples, self.fs, self.t0_offset, None, self.frame_centroid, self.guard
        )


def spectral_derivative(samples: np.ndarray, fs: float) -> np.ndarray:
    n = samples.size
    f = sfft.fftfreq(n, 1.0 / fs)
    if n % 2 == 0:
        f[n // 2] = 0.0  # Nyquist bin has no well-defined sign
    return sfft.ifft(2j * np.pi * f * sfft.fft(samples))


def occupied_bandwidth(spec: WaveformSpec) -> float:
    return spec.bandwidth


def default_fs(spec: WaveformSpec, oversample: int = OVERSAMPLE) -> float:
    return oversample * occupied_bandwidth(spec)


def _render_frame(spec: WaveformSpec, fs: float) -> tuple[np.ndarray, float]:
    """Samples covering the frame, taken at ``(n + 1/2)/fs`` from frame start.

    Returns the samples and the pre-roll (seconds of pulse tail that start
    before the frame), which is nonzero only for band-limited PMCW chips.
    """
    if isinstance(spec, FMCW):
        return _render_fmcw(spec, fs), 0.0
    if isinstance(spec, PMCW):
        return _render_pmcw(spec, fs)
    if isinstance(spec, OTFS):
        return _render_ofdm(spec.as_ofdm(), fs), 0.0
    if isinstance(spec, OFDM):
        return _render_ofdm(spec, fs), 0.0
    raise ConfigurationError(f"unknown waveform {type(spec).__name__}")


def _render_fmcw(spec: FMCW, fs: float) -> np.ndarray:
    n = int(round(spec.frame_length * fs))
    t = (np.arange(n) + 0.5) / fs
    k = np.minimum((t // spec.T).astype(int), spec.K - 1)
    u = t - k * spec.T - spec.T / 2
    return spec.data[k] * np.exp(1j * np.pi * spec.slope * u**2)


def _render_pmcw(spec: PMCW, fs: float) -> tuple[np.ndarray, float]:
    chips = spec.chips()
    pulse = spec.pulse
    t_c = spec.T_c
    n_frame = int(round(spec.frame_length * fs))
    if isinstance(pulse, Rect) and not pulse.mainlobe_only:
        t = (np.arange(n_frame) + 0.5) / fs
        idx = np.minimum((t // t_c).astype(int), chips.size - 1)
        return chips[idx].astype(complex), 0.0
    h = pulse.half_support(t_c)
    pre = int(math.ceil(h * fs))
    n_total = n_frame + 2 * pre
    centers = (np.arange(chips.size) + 0.5) * t_c  # frame time
    w = int(math.ceil(h * fs)) + 1
    offs = np.arange(-w, w + 1)
    out = np.zeros(n_total)
    for lo in range(0, chips.size, 4096):
        c = centers[lo : lo + 4096]
        base = np.floor(c * fs - 0.5).astype(int) + pre
        idx = base[:, None] + offs[None, :]
        tt = (idx - pre + 0.5) / fs - c[:, None]
        vals = pulse.impulse(tt, t_c) * (np.abs(tt) <= h)
        vals *= chips[lo : lo + 4096, None]
        ok = (idx >= 0) & (idx < n_total)
        out += np.bincount(idx[ok], weights=vals[ok], minlength=n_total)
    return out.astype(complex), pre / fs


def _render_ofdm(spec: OFDM, fs: float) -> np.ndarray:
    m_f = spec.T * fs
    cp_f = spec.T_cp * fs
    M, Ncp = int(round(m_f)), int(round(cp_f))
    if abs(m_f - M) > _INT_TOL * max(1.0, m_f) or abs(cp_f - Ncp) > _INT_TOL * max(1.0, cp_f):
        raise SamplingError("OFDM needs fs*T and fs*T_cp to be whole sample counts")
    K, L = spec.K, spec.L
    if M < L:
        raise SamplingError(f"fs={fs:g} Hz is below the OFDM bandwidth {spec.bandwidth:g} Hz")
    Y = np.zeros((K, M), complex)
    Y[:, :L] = spec.symbols * np.exp(1j * np.pi * np.arange(L) / M)
    y = sfft.ifft(Y, axis=1) * M
    m = np.concatenate([np.arange(M - Ncp, M), np.arange(M)])
    # CP samples reuse the useful-part phase reference shifted by +T
    phase = np.exp(-1j * np.pi * (L - 1) * (m + 0.5) / M)
    return (y[:, m] * phase[None, :]).ravel()


def synthesize(
    spec: WaveformSpec,
    fs: float | None = None,
    *,
    guard: float | None = None,
    tau_max: float = 0.0,
) -> SampledSignal:
    """Sample ``spec`` at ``fs`` (default ``4 B``) with zero-padded guards.

    The default guard is ``max(2 tau_max, 8/B)`` on each side, plus any
    pulse tail that leaks outside the frame.
    """
    B = occupied_bandwidth(spec)
    if fs is None:
        if B <= 0:
            raise ConfigurationError("sample rate must be given for a zero-bandwidth waveform")
        fs = default_fs(spec)
    if fs < B * (1 - 1e-12):
        raise SamplingError(f"fs={fs:g} Hz is below the occupied bandwidth {B:g} Hz")
    frame, pre_roll = _render_frame(spec, fs)
    if guard is None:
        guard = max(2 * tau_max, 8.0 / B if B > 0 else 8.0 / fs)
    n_guard = int(math.ceil(guard * fs))
    n_pre = int(round(pre_roll * fs))
    n_g = n_guard  # zero padding beyond any pulse tail
    n_min = frame.size + 2 * n_g
    n_total = sfft.next_fast_len(n_min)
    lead = n_g + (n_total - n_min) // 2
    samples = np.zeros(n_total, complex)
    samples[lead : lead + frame.size] = frame
    # frame-axis time of every sample; frame start is n = lead + n_pre
    t_frame = (np.arange(n_total) - lead - n_pre + 0.5) / fs
    p = np.abs(samples) ** 2
    if p.sum() == 0:
        raise ConfigurationError("waveform has zero energy")
    t0 = float(np.dot(t_frame, p) / p.sum())
    return SampledSignal(
        samples,
        fs,
        t0_offset=float(t_frame[0] - t0),
        frame_centroid=t0,
        guard=min(lead, n_total - lead - frame.size) / fs,
    )


def synthesize_like(spec: WaveformSpec, like: SampledSignal) -> SampledSignal:
    """Render ``spec`` on exactly the sample grid and time axis of ``like``.

    Used for multiplexed branches, which must share the parent's axis and
    frame centroid rather than being re-centred on their own energy.
    """
    frame, pre_roll = _render_frame(spec, like.fs)
    n_pre = int(round(pre_roll * like.fs))
    # sample n sits at frame time (n - start + 1/2)/fs, start = lead + n_pre
    start = int(round(0.5 - (like.t0_offset + like.frame_centroid) * like.fs))
    lead = start - n_pre
    if lead < 0 or lead + frame.size > len(like):
        raise ConfigurationError("branch does not fit on the parent sample grid")
    samples = np.zeros(len(like), complex)
    samples[lead : lead + frame.size] = frame
    return like.replace_samples(samples)


def apply_scene(sig: SampledSignal, scene: SceneParams) -> list[SampledSignal]:
    """Noiseless per-element branches ``A e^{j phi} a_R^* s(t - tau) e^{j2pi f_D (t + T_0)}``."""
    if abs(scene.tau) > sig.guard:
        raise TruncationError(
            f"delay {scene.tau:g} s exceeds the {sig.guard:g} s guard; resynthesize with tau_max"
        )
    s = sig.samples
    if scene.tau != 0.0:
        f = sfft.fftfreq(s.size, 1.0 / sig.fs)
        s = sfft.ifft(sfft.fft(s) * np.exp(-2j * np.pi * f * scene.tau))
    if scene.f_D != 0.0:
        s = s * np.exp(2j * np.pi * scene.f_D * (sig.t + sig.frame_centroid))
    gain = scene.A * np.exp(1j * scene.phi)
    if gain != 1:
        s = gain * s
    steer = scene.steering_conj()
    return [sig.replace_samples(s if a == 1 else a * s) for a in steer]


def add_noise(
    branches: Sequence[SampledSignal], sigma2: float, rng: np.random.Generator
) -> list[SampledSignal]:
    """Add independent circular complex white noise of power ``sigma2`` per sample."""
    out = []
    for b in branches:
        n = rng.standard_normal((2, len(b))) * math.sqrt(sigma2 / 2)
        out.append(b.replace_samples(b.samples + n[0] + 1j * n[1]))
    return out


# --------------------------------------------------------------------------
# random frames
# --------------------------------------------------------------------------


def random_pmcw(
    rng: np.random.Generator, pulse: PulseShape, T_c: float, L: int, K: int
) -> PMCW:
    code = rng.choice([-1.0, 1.0], size=L)
    data = rng.choice([-1.0, 1.0], size=K)
    return PMCW(pulse, T_c, code, data)


def qpsk(rng: np.random.Generator, shape) -> np.ndarray:
    bits = rng.integers(0, 2, size=(2,) + tuple(np.atleast_1d(shape)))
    return ((1 - 2 * bits[0]) + 1j * (1 - 2 * bits[1])) / math.sqrt(2)


def random_ofdm(
    rng: np.random.Generator, delta_f: float, L: int, K: int, L_cp: int = 0
) -> OFDM:
    return OFDM(delta_f, qpsk(rng, (K, L)), L_cp)


def random_otfs(
    rng: np.random.Generator, delta_f: float, L: int, K: int, L_cp: int = 0
) -> OTFS:
    return OTFS(delta_f, qpsk(rng, (L, K)), L_cp)


# --------------------------------------------------------------------------
# binary exchange format
# --------------------------------------------------------------------------

_HEADER = struct.Struct("<dQd")


def write_signal(path: str | Path, sig: SampledSignal) -> None:
    """Little-endian ``{fs: f64, n: u64, t0_offset: f64}`` then ``n`` (re, im) f64 pairs."""
    body = np.empty((len(sig), 2), dtype="<f8")
    body[:, 0] = sig.samples.real
    body[:, 1] = sig.samples.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(sig.fs, len(sig), sig.t0_offset))
        fh.write(body.tobytes())


def read_signal(path: str | Path) -> SampledSignal:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ConfigurationError(f"{path}: truncated signal header")
    fs, n, t0 = _HEADER.unpack_from(raw)
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != 2 * n:
        raise ConfigurationError(f"{path}: header announces {n} samples, found {body.size // 2}")
    pairs = body.reshape(n, 2)
    return SampledSignal(pairs[:, 0] + 1j * pairs[:, 1], fs, t0)
