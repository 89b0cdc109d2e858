"""Closed-form delay, Doppler and angle CRLBs for the four waveform families.

All evaluators return :class:`~isac_crlb.fisher.CrlbResult`; a bound that is
structurally unbounded (``K = 1`` for FMCW, ``N_R = 1`` or endfire for AoA)
is ``math.inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from isac_crlb.errors import ConfigurationError
from isac_crlb.fisher import CrlbResult
from isac_crlb.spectral import pulse_rms_bandwidth_sq
from isac_crlb.waveform import FMCW, OFDM, OTFS, PMCW, RC, PulseShape, WaveformSpec

__all__ = [
    "ClosedFormRequest",
    "crlb_fmcw",
    "crlb_pmcw",
    "crlb_ofdm_continuous",
    "crlb_ofdm_discrete",
    "crlb_otfs",
    "crlb_aoa",
    "pulse_factor",
    "delay_base",
    "doppler_base",
    "rc_rect_crossing",
]

_PI2 = math.pi**2


@dataclass(frozen=True)
class ClosedFormRequest:
    """Everything the closed forms need, in linear units.

    ``delta_f`` and ``T_s`` are only read by the discrete OFDM variant; when
    omitted they follow from ``B = L delta_f`` and ``T_F = K T_s``.
    """

    B: float
    T_F: float
    K: int = 1
    L: int = 1
    pulse: PulseShape | None = None
    n_r: int = 1
    gamma: float = 10.0
    theta_R: float = 0.0
    approx_large_k: bool = False
    delta_f: float | None = None
    T_s: float | None = None

    def __post_init__(self):
        if not (self.B > 0 and self.T_F > 0):
            raise ConfigurationError("B and T_F must be positive")
        if self.K < 1 or self.L < 1:
            raise ConfigurationError("K and L must be >= 1")
        if self.n_r < 1:
            raise ConfigurationError("n_r must be >= 1")
        if not float(self.gamma) > 0:
            raise ConfigurationError("ESNR must be positive")

    @classmethod
    def from_spec(cls, spec: WaveformSpec, **kw) -> "ClosedFormRequest":
        """Pull ``B, T_F, K, L`` (and pulse, ``delta_f``, ``T_s``) from a waveform."""
        base = dict(B=spec.bandwidth, T_F=spec.frame_length, K=spec.K)
        if isinstance(spec, PMCW):
            base.update(L=spec.L, pulse=spec.pulse)
        elif isinstance(spec, (OFDM, OTFS)):
            base.update(L=spec.L, delta_f=spec.delta_f, T_s=spec.T_s)
        base.update(kw)
        return cls(**base)

    @property
    def info_scale(self) -> float:
        """``N_R gamma``."""
        return self.n_r * float(self.gamma)


def delay_base(req: ClosedFormRequest) -> float:
    """``3 / (2 pi^2 N_R gamma B^2)``: flat-spectrum delay bound."""
    return 3.0 / (2 * _PI2 * req.info_scale * req.B**2)


def doppler_base(req: ClosedFormRequest) -> float:
    """``3 / (2 pi^2 N_R gamma T_F^2)``: uniform-envelope Doppler bound."""
    return 3.0 / (2 * _PI2 * req.info_scale * req.T_F**2)


def crlb_aoa(n_r: int, gamma: float, theta_R: float) -> float:
    """``6 / (pi^2 cos^2(theta) N_R (N_R^2 - 1) gamma)``; infinite when unidentifiable."""
    c = math.cos(theta_R)
    if n_r < 2 or abs(c) < 1e-12:
        return math.inf
    return 6.0 / (_PI2 * c * c * n_r * (n_r * n_r - 1) * float(gamma))


def _aoa(req: ClosedFormRequest) -> float:
    return crlb_aoa(req.n_r, req.gamma, req.theta_R)


def crlb_fmcw(req: ClosedFormRequest) -> CrlbResult:
    """Chirp-train bounds with the finite-``K`` factor ``1 - 1/K^2``."""
    shrink = 1.0 - 1.0 / req.K**2
    c_tau_a, c_fd_a = delay_base(req), doppler_base(req)
    if shrink == 0.0:
        c_tau = c_fd = math.inf
    else:
        c_tau, c_fd = c_tau_a / shrink, c_fd_a / shrink
    extras = {"exact_over_approx": math.inf if shrink == 0.0 else 1.0 / shrink}
    if req.approx_large_k:
        extras.update(c_tau_approx=c_tau_a, c_fd_approx=c_fd_a)
    return CrlbResult(c_tau, c_fd, _aoa(req), extras=extras)


def pulse_factor(pulse: PulseShape) -> float:
    """Delay-bound multiplier of a pulse over the sinc (flat) case.

    ``(B^2/12) / B_rms^2`` with each pulse's own occupied bandwidth ``B``.
    """
    if isinstance(pulse, RC) and pulse.alpha == 0:
        raise ConfigurationError("RC with zero roll-off is the sinc pulse")
    t_c = 1.0
    b = pulse.bandwidth(t_c)
    return (b * b / 12.0) / pulse_rms_bandwidth_sq(pulse, t_c)


def crlb_pmcw(req: ClosedFormRequest) -> CrlbResult:
    """Phase-coded bounds; only the delay bound depends on the pulse."""
    if req.pulse is None:
        raise ConfigurationError("PMCW bound needs a pulse shape")
    fac = pulse_factor(req.pulse)
    c_tau = delay_base(req) * fac
    extras = {"pulse_factor": fac, "c_tau_nrgb2": c_tau * req.info_scale * req.B**2}
    return CrlbResult(c_tau, doppler_base(req), _aoa(req), extras=extras)


def crlb_ofdm_continuous(req: ClosedFormRequest) -> CrlbResult:
    """Multicarrier bounds from the continuous flat spectrum and envelope."""
    return CrlbResult(delay_base(req), doppler_base(req), _aoa(req))


def crlb_ofdm_discrete(req: ClosedFormRequest) -> CrlbResult:
    """Grid-based bounds, ``L^2/(L^2-1)`` and ``K^2/(K^2-1)`` above the continuous ones.

    Evaluated from the subcarrier/symbol grid directly:
    ``3 / (2 pi^2 N_R gamma (L^2-1) delta_f^2)`` and the ``T_s`` analogue.
    """
    if req.K < 2 or req.L < 2:
        raise ConfigurationError("discrete OFDM bound needs K >= 2 and L >= 2")
    df = req.delta_f if req.delta_f is not None else req.B / req.L
    ts = req.T_s if req.T_s is not None else req.T_F / req.K
    scale = 2 * _PI2 * req.info_scale
    c_tau = 3.0 / (scale * (req.L**2 - 1) * df**2)
    c_fd = 3.0 / (scale * (req.K**2 - 1) * ts**2)
    extras = {
        "ratio_tau": (req.L**2 - 1) / req.L**2,
        "ratio_fd": (req.K**2 - 1) / req.K**2,
    }
    return CrlbResult(c_tau, c_fd, _aoa(req), extras=extras)


def crlb_otfs(req: ClosedFormRequest, discrete: bool = False) -> CrlbResult:
    """OTFS shares the OFDM second-order statistics, hence the OFDM bounds."""
    return crlb_ofdm_discrete(req) if discrete else crlb_ofdm_continuous(req)


def crlb_for_spec(spec: WaveformSpec, **kw) -> CrlbResult:
    """Dispatch to the evaluator matching ``spec``'s family."""
    req = ClosedFormRequest.from_spec(spec, **kw)
    if isinstance(spec, FMCW):
        return crlb_fmcw(req)
    if isinstance(spec, PMCW):
        return crlb_pmcw(req)
    if isinstance(spec, OTFS):
        return crlb_otfs(req)
    if isinstance(spec, OFDM):
        return crlb_ofdm_continuous(req)
    raise ConfigurationError(f"unknown waveform {type(spec).__name__}")


def rc_rect_crossing(lo: float = 0.01, hi: float = 1.0, tol: float = 1e-10) -> float:
    """Roll-off where the RC delay factor overtakes the rectangular one (bisection)."""
    from isac_crlb.waveform import Rect

    target = pulse_factor(Rect())

    def g(a):
        return pulse_factor(RC(a)) - target

    if g(lo) * g(hi) > 0:
        raise ConfigurationError("no RC/Rect crossing inside the bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(lo) * g(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
