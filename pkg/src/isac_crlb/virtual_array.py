"""MIMO virtual-array multiplexing and the resulting per-transmitter FIM sum.

Every branch is rendered on the parent's sample grid so all transmitters
share one time axis, one frame centroid and one nuisance phase.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from scipy import fft as sfft
from scipy.linalg import hadamard

from isac_crlb.errors import ConfigurationError
from isac_crlb.fisher import FisherMatrix, fim_from_signal
from isac_crlb.scene import ArrayConfig, SceneParams
from isac_crlb.waveform import (
    FMCW,
    OFDM,
    OTFS,
    PMCW,
    SampledSignal,
    WaveformSpec,
    synthesize,
    synthesize_like,
)

__all__ = [
    "ITDM",
    "BTDM",
    "BFDM",
    "CFDM",
    "CDM",
    "VaScheme",
    "VaCrlbRatios",
    "parse_scheme",
    "multiplex",
    "virtual_positions",
    "va_fim",
    "baseline_scene",
    "esnr_factor",
    "va_crlb_ratios",
    "cdm_decoded_noise_covariance",
    "cdm_decode_noise_check",
    "write_ratio_csv",
]

VA_PARAMS = ("phi", "tau", "f_D", "theta_R")


@dataclass(frozen=True)
class ITDM:
    """Interleaved TDM: transmitter ``n`` owns PRIs ``k = n mod N_T``."""

    name = "ITDM"
    family = "TDM"


@dataclass(frozen=True)
class BTDM:
    """Block TDM: transmitter ``n`` owns the ``n``-th contiguous sub-frame."""

    name = "BTDM"
    family = "TDM"


@dataclass(frozen=True)
class BFDM:
    """Block FDM: transmitter ``n`` owns the ``n``-th contiguous sub-band."""

    name = "BFDM"
    family = "FDM"


@dataclass(frozen=True)
class CFDM:
    """Comb FDM: transmitter ``n`` owns subcarriers ``l = n mod N_T``."""

    name = "CFDM"
    family = "FDM"


@dataclass(frozen=True)
class CDM:
    """Hadamard outer code, each outer chip held for ``beta`` PRIs."""

    beta: int = 2
    name = "CDM"
    family = "CDM"

    def __post_init__(self):
        if self.beta < 2:
            raise ConfigurationError("CDM repetition factor beta must be >= 2")


VaScheme = Union[ITDM, BTDM, BFDM, CFDM, CDM]


def parse_scheme(name: str, beta: int | None = None) -> VaScheme:
    key = name.strip().upper()
    table = {"ITDM": ITDM, "BTDM": BTDM, "BFDM": BFDM, "CFDM": CFDM}
    if key in table:
        return table[key]()
    if key == "CDM":
        if beta is None:
            raise ConfigurationError("CDM needs a repetition factor beta")
        return CDM(int(beta))
    raise ConfigurationError(f"unknown multiplexing scheme {name!r}")


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


# --------------------------------------------------------------------------
# signal construction
# --------------------------------------------------------------------------


def _pri(spec: WaveformSpec) -> float:
    return spec.T_s if isinstance(spec, (OFDM, OTFS)) else spec.T


def _pri_index(sig: SampledSignal, spec: WaveformSpec) -> np.ndarray:
    """PRI index of every sample (-1 / K outside the frame)."""
    t_frame = sig.t + sig.frame_centroid
    return np.floor(t_frame / _pri(spec)).astype(int)


def _gate(sig: SampledSignal, mask: np.ndarray) -> SampledSignal:
    return sig.replace_samples(np.where(mask, sig.samples, 0.0))


def _check_scheme(spec: WaveformSpec, scheme: VaScheme, n_t: int) -> None:
    if scheme.family == "TDM" and spec.K % n_t:
        raise ConfigurationError(f"TDM needs K divisible by N_T (K={spec.K}, N_T={n_t})")
    if isinstance(scheme, BFDM) and not isinstance(spec, (FMCW, PMCW)):
        raise ConfigurationError("BFDM applies to single-carrier waveforms; use CFDM")
    if isinstance(scheme, CFDM):
        if not isinstance(spec, (OFDM, OTFS)):
            raise ConfigurationError("CFDM applies to multicarrier waveforms")
        if spec.L % n_t:
            raise ConfigurationError("CFDM needs L divisible by N_T")
    if isinstance(scheme, CDM):
        if not isinstance(spec, PMCW):
            raise ConfigurationError("CDM is built on PMCW")
        if not _is_pow2(n_t):
            raise ConfigurationError("CDM needs N_T to be a power of two")
        if spec.K % (n_t * scheme.beta):
            raise ConfigurationError("CDM needs K divisible by N_T * beta")


def multiplex(
    spec: WaveformSpec,
    scheme: VaScheme,
    n_t: int,
    fs: float | None = None,
    *,
    discard_first: bool = False,
    parent: SampledSignal | None = None,
    **synth_kw,
) -> list[SampledSignal]:
    """Per-transmitter signals ``s_{n_T}(t)`` sharing the parent's time axis.

    FDM branches carry a ``sqrt(N_T)`` gain so each antenna keeps the parent's
    average power. With ``discard_first`` the CDM branches have the first PRI
    of every ``beta`` group zeroed instead of being scaled by ``(beta-1)/beta``
    later.
    """
    if n_t < 1:
        raise ConfigurationError("N_T must be >= 1")
    sig = parent if parent is not None else synthesize(spec, fs, **synth_kw)
    if n_t == 1:
        return [sig]
    _check_scheme(spec, scheme, n_t)

    if scheme.family == "TDM":
        k = _pri_index(sig, spec)
        inside = (k >= 0) & (k < spec.K)
        if isinstance(scheme, ITDM):
            owner = np.mod(k, n_t)
        else:
            owner = (k * n_t) // spec.K
        return [_gate(sig, inside & (owner == n)) for n in range(n_t)]

    if isinstance(scheme, BFDM):
        f = sfft.fftfreq(len(sig), sig.dt)
        B = spec.bandwidth
        edges = -B / 2 + B * np.arange(n_t + 1) / n_t
        band = np.clip(np.searchsorted(edges, f, side="right") - 1, 0, n_t - 1)
        S = sfft.fft(sig.samples)
        g = math.sqrt(n_t)
        return [sig.replace_samples(g * sfft.ifft(np.where(band == n, S, 0.0))) for n in range(n_t)]

    if isinstance(scheme, CFDM):
        X = spec.tf_grid()
        l_idx = np.arange(spec.L)
        g = math.sqrt(n_t)
        out = []
        for n in range(n_t):
            Xn = np.where((l_idx % n_t == n)[None, :], X, 0.0)
            out.append(synthesize_like(OFDM(spec.delta_f, g * Xn, spec.L_cp), sig))
        return out

    # CDM
    H = hadamard(n_t).astype(float)
    k = np.arange(spec.K)
    block = (k // scheme.beta) % n_t
    out = []
    for n in range(n_t):
        coded = PMCW(spec.pulse, spec.T_c, spec.code, spec.data * H[n, block])
        b = synthesize_like(coded, sig)
        if discard_first:
            kk = _pri_index(sig, spec)
            b = _gate(b, ~((kk >= 0) & (kk < spec.K) & (np.mod(kk, scheme.beta) == 0)))
        out.append(b)
    return out


# --------------------------------------------------------------------------
# Fisher information
# --------------------------------------------------------------------------


def virtual_positions(n_t: int, n_r: int, d_t: float = 0.5) -> np.ndarray:
    """``(n_T d_T + n_R N_T d_T)`` for each (n_T, n_R), shaped ``(N_T, N_R)``."""
    return d_t * (np.arange(n_t)[:, None] + n_t * np.arange(n_r)[None, :])


def va_fim(
    spec: WaveformSpec,
    scheme: VaScheme,
    scene: SceneParams,
    fs: float | None = None,
    *,
    discard_first: bool = False,
    branches: list[SampledSignal] | None = None,
) -> FisherMatrix:
    """Sum of per-transmitter FIMs over ``(phi, tau, f_D, theta_R)``.

    ``scene.A`` is the beamformed amplitude; each branch is scaled by the
    unbeamformed ``a = A / N_T`` and steered with its virtual positions.
    """
    n_t, n_r = scene.array.N_T, scene.array.N_R
    if branches is None:
        branches = multiplex(
            spec, scheme, n_t, fs, discard_first=discard_first, tau_max=abs(scene.tau)
        )
    if len(branches) != n_t:
        raise ConfigurationError("need one branch per transmitter")
    pos = virtual_positions(n_t, n_r, scene.array.d_T)
    a = scene.A / n_t
    total = None
    for n, b in enumerate(branches):
        sc = scene.with_(A=a, positions=tuple(pos[n]))
        F = fim_from_signal(b, sc)
        total = F if total is None else total + F
    if isinstance(scheme, CDM) and n_t > 1 and not discard_first:
        total = total.scaled((scheme.beta - 1) / scheme.beta)
    return total.sub(VA_PARAMS)


def baseline_scene(scene: SceneParams) -> SceneParams:
    """The non-VA reference: ``N_R`` elements at ``d_T`` spacing, amplitude ``A``."""
    arr = scene.array
    return scene.with_(array=ArrayConfig(1, arr.N_R, arr.d_T, arr.d_T, arr.wavelength), positions=None)


# --------------------------------------------------------------------------
# closed-form ratios
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class VaCrlbRatios:
    """VA bound divided by the non-VA bound with the same ``A``, ``T_F``, ``B``."""

    r_tau: float
    r_fd: float
    r_theta_exact: float
    r_theta_approx: float


def esnr_factor(scheme: VaScheme, n_t: int) -> float:
    """``gamma_v / gamma``."""
    if scheme.family == "TDM":
        return 1.0 / n_t**3
    if scheme.family == "FDM":
        return 1.0 / n_t**2
    return (scheme.beta - 1) / (scheme.beta * n_t**2)


def va_crlb_ratios(
    scheme: VaScheme | str, n_t: int, beta: int | None = None, n_r: int = 8
) -> VaCrlbRatios:
    """Delay, Doppler and angle CRLB ratios of a VA scheme.

    The exact angle ratio compares ``N_v (N_v^2 - 1) gamma_v`` with
    ``N_R (N_R^2 - 1) gamma``; the approximate one drops the ``-1`` terms.
    """
    if isinstance(scheme, str):
        scheme = parse_scheme(scheme, beta)
    if n_t < 1:
        raise ConfigurationError("N_T must be >= 1")
    if n_r < 2:
        raise ConfigurationError("angle ratios need N_R >= 2")
    if n_t == 1:
        return VaCrlbRatios(1.0, 1.0, 1.0, 1.0)
    g = esnr_factor(scheme, n_t)
    # sum of per-branch moments is N_T times the parent's in every scheme
    r = 1.0 / (n_t * g)
    n_v = n_t * n_r
    exact = n_r * (n_r**2 - 1) / (n_v * (n_v**2 - 1) * g)
    approx = 1.0 / (n_t**3 * g)
    return VaCrlbRatios(r, r, exact, approx)


def write_ratio_csv(path: str | Path, rows, header_comment: str | None = None) -> None:
    """``scheme,n_t,beta,r_tau,r_fd,r_theta_exact,r_theta_approx`` rows."""
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh)
        w.writerow(["scheme", "n_t", "beta", "r_tau", "r_fd", "r_theta_exact", "r_theta_approx"])
        for name, n_t, beta, r in rows:
            w.writerow(
                [name, n_t, "" if beta is None else beta]
                + [repr(float(v)) for v in (r.r_tau, r.r_fd, r.r_theta_exact, r.r_theta_approx)]
            )


# --------------------------------------------------------------------------
# CDM receive-side noise
# --------------------------------------------------------------------------


def cdm_decoded_noise_covariance(
    n_t: int, n_samples: int, trials: int, rng: np.random.Generator, sigma2: float = 1.0
) -> np.ndarray:
    """Monte-Carlo covariance of Hadamard-decoded white noise, averaged over trials.

    Block ``b`` of the received noise is ``w_b``; stream ``i`` is decoded as
    ``z_i = N_T^{-1/2} sum_b H[i, b] w_b``.
    """
    if not _is_pow2(n_t):
        raise ConfigurationError("CDM needs N_T to be a power of two")
    H = hadamard(n_t).astype(float) / math.sqrt(n_t)
    acc = np.zeros((n_t, n_t), complex)
    s = math.sqrt(sigma2 / 2)
    for _ in range(trials):
        w = s * (rng.standard_normal((n_t, n_samples)) + 1j * rng.standard_normal((n_t, n_samples)))
        z = H @ w
        acc += z @ z.conj().T / n_samples
    return acc / trials


def cdm_decode_noise_check(
    n_t: int, n_samples: int, trials: int, rng: np.random.Generator, sigma2: float = 1.0
) -> float:
    """Largest off-diagonal decoded-noise covariance magnitude over ``sigma2``."""
    if n_t == 1:
        return 0.0
    C = cdm_decoded_noise_covariance(n_t, n_samples, trials, rng, sigma2)
    off = C - np.diag(np.diag(C))
    return float(np.max(np.abs(off)) / sigma2)
