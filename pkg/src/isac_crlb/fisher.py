"""Numeric Fisher information of a sampled scene and its reduction to CRLBs.

The noiseless observation on receive element ``n`` is

    mu_n(t) = A e^{j phi} e_n(theta) s(t - tau) e^{j 2 pi f_D (t + T0)}

with ``e_n = a_R^*(theta)[n]``. Every partial derivative factors into an
element part and a time part, so the FIM is the real part of the Hadamard
product of two small Gram matrices.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import fft as sfft

from isac_crlb.errors import DegenerateSceneError, NumericalError, TruncationError
from isac_crlb.scene import ArrayConfig, SceneParams
from isac_crlb.waveform import SampledSignal, WaveformSpec, synthesize

__all__ = [
    "ArrayConfig",
    "SceneParams",
    "FisherMatrix",
    "CrlbResult",
    "PARAMS",
    "fim_from_signal",
    "fim_numeric",
    "efim",
    "crlb_from_efim",
    "crlb_numeric",
    "crlb_from_signal",
    "crlb_from_draws",
    "write_fim_csv",
    "compute_c0",
    "compute_im_c1",
    "coupling_report",
    "format_bound",
]

PARAMS = ("A", "phi", "tau", "f_D", "theta_R")
PSD_TOL = 1e-9
SYM_TOL = 1e-12
DECOUPLE_TOL = 1e-9
SCHUR_CANCEL = 1e-12


@dataclass(frozen=True, eq=False)
class FisherMatrix:
    """Symmetric real matrix with named rows/columns."""

    entries: np.ndarray
    order: tuple[str, ...] = PARAMS

    def __post_init__(self):
        e = np.array(self.entries, dtype=float, copy=True)
        if e.shape != (len(self.order), len(self.order)):
            raise ValueError(f"shape {e.shape} does not match order {self.order}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "order", tuple(self.order))

    def index(self, name: str) -> int:
        return self.order.index(name)

    def __getitem__(self, key: tuple[str, str]) -> float:
        i, j = key
        return float(self.entries[self.index(i), self.index(j)])

    def __add__(self, other: "FisherMatrix") -> "FisherMatrix":
        if other.order != self.order:
            raise ValueError("cannot add Fisher matrices with different orderings")
        return FisherMatrix(self.entries + other.entries, self.order)

    def scaled(self, factor: float) -> "FisherMatrix":
        return FisherMatrix(self.entries * factor, self.order)

    def sub(self, names: Sequence[str]) -> "FisherMatrix":
        idx = [self.index(n) for n in names]
        return FisherMatrix(self.entries[np.ix_(idx, idx)], tuple(names))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def check(self, psd_tol: float = PSD_TOL) -> None:
        """Raise :class:`NumericalError` unless symmetric and PSD within tolerance.

        The eigen test runs on the diagonally equilibrated matrix, since the
        raw entries span many decades (seconds vs hertz).
        """
        e = self.entries
        scale = np.max(np.abs(e)) or 1.0
        asym = np.abs(e - e.T)
        if asym.max() > SYM_TOL * scale:
            i, j = np.unravel_index(np.argmax(asym), e.shape)
            raise NumericalError(
                f"FIM not symmetric: worst entry ({self.order[i]}, {self.order[j]}) "
                f"off by {asym[i, j]:.3e}"
            )
        d = np.sqrt(np.where(np.diag(e) > 0, np.diag(e), 1.0))
        en = e / np.outer(d, d)
        w, v = np.linalg.eigh(0.5 * (en + en.T))
        if w[0] < -psd_tol * np.trace(en):
            k = int(np.argmax(np.abs(v[:, 0])))
            raise NumericalError(
                f"FIM not PSD (eigenvalue {w[0]:.3e}); worst entry involves {self.order[k]}"
            )

    def to_rows(self) -> list[tuple[str, str, float]]:
        return [
            (a, b, float(self.entries[i, j]))
            for i, a in enumerate(self.order)
            for j, b in enumerate(self.order)
        ]


def format_bound(x: float) -> str:
    """CSV cell for a bound; structural singularities print as ``unbounded``."""
    return "unbounded" if math.isinf(x) else repr(float(x))


@dataclass(frozen=True)
class CrlbResult:
    """Diagonal of ``E^{-1}``. ``math.inf`` marks a structurally unbounded coordinate."""

    c_tau: float
    c_fd: float
    c_theta: float
    coupling: dict | None = None
    extras: dict = field(default_factory=dict)

    @property
    def unbounded(self) -> tuple[str, ...]:
        names = ("c_tau", "c_fd", "c_theta")
        return tuple(n for n in names if math.isinf(getattr(self, n)))

    def bounds(self) -> dict[str, float]:
        return {"c_tau": self.c_tau, "c_fd": self.c_fd, "c_theta": self.c_theta}


# --------------------------------------------------------------------------
# numeric FIM
# --------------------------------------------------------------------------


def _delayed(sig: SampledSignal, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """``s(t - tau)`` and its time derivative, both by spectral interpolation."""
    if abs(tau) > sig.guard:
        raise TruncationError(f"delay {tau:g} s exceeds the {sig.guard:g} s guard")
    n = len(sig)
    f = sfft.fftfreq(n, sig.dt)
    S = sfft.fft(sig.samples)
    if tau != 0.0:
        S = S * np.exp(-2j * np.pi * f * tau)
    if n % 2 == 0:
        f[n // 2] = 0.0
    return sfft.ifft(S), sfft.ifft(2j * np.pi * f * S)


def fim_from_signal(sig: SampledSignal, scene: SceneParams, check: bool = True) -> FisherMatrix:
    """FIM over ``(A, phi, tau, f_D, theta_R)`` for a synthesized signal.

    The Doppler derivative is weighted by ``t + T0`` where ``T0`` is the frame
    centroid before the shift, so ``F[phi, f_D] = 4 pi N_R gamma (T0 + tau)``.
    """
    x, xd = _delayed(sig, scene.tau)
    t_abs = sig.t + sig.frame_centroid
    dop = np.exp(2j * np.pi * scene.f_D * t_abs) if scene.f_D != 0.0 else 1.0
    x = x * dop
    xd = xd * dop
    g = scene.A * np.exp(1j * scene.phi)
    V = np.stack(
        [
            np.exp(1j * scene.phi) * x,
            1j * g * x,
            -g * xd,
            2j * np.pi * t_abs * g * x,
            g * x,
        ]
    )
    G_time = (V.conj() @ V.T) * sig.dt
    e = scene.steering_conj()
    ed = scene.steering_conj_derivative()
    Em = np.stack([e, e, e, e, ed])
    G_elem = Em.conj() @ Em.T
    F = (2.0 / scene.sigma2) * np.real(G_time * G_elem)
    F = 0.5 * (F + F.T)
    fm = FisherMatrix(F, PARAMS)
    if check:
        fm.check()
    return fm


def fim_numeric(
    spec: WaveformSpec, scene: SceneParams, fs: float | None = None, **synth_kw
) -> FisherMatrix:
    """Synthesize ``spec`` and return its numeric FIM for ``scene``."""
    synth_kw.setdefault("tau_max", abs(scene.tau))
    sig = synthesize(spec, fs, **synth_kw)
    return fim_from_signal(sig, scene)


# --------------------------------------------------------------------------
# EFIM and CRLB
# --------------------------------------------------------------------------


def efim(F: FisherMatrix) -> FisherMatrix:
    """Schur complement of the phase over ``(phi, tau, f_D, theta_R)``."""
    if "A" in F.order:
        a = F.index("A")
        off = np.delete(F.entries[a], a)
        if np.max(np.abs(off), initial=0.0) > DECOUPLE_TOL * F.norm:
            raise NumericalError("amplitude is not decoupled from the other parameters")
    names = ("tau", "f_D", "theta_R")
    sub = F.sub(("phi",) + names).entries
    f_pp = sub[0, 0]
    if not f_pp > 0:
        raise DegenerateSceneError("phase information F[phi, phi] must be positive")
    col = sub[1:, 0]
    E = sub[1:, 1:] - np.outer(col, col) / f_pp
    # a coordinate whose information the phase absorbs completely is dead
    pre = np.diag(sub)[1:]
    dead = np.diag(E) <= SCHUR_CANCEL * pre
    E[dead, :] = 0.0
    E[:, dead] = 0.0
    return FisherMatrix(0.5 * (E + E.T), names)


def crlb_from_efim(E: FisherMatrix | np.ndarray, coupling: dict | None = None) -> CrlbResult:
    """Invert the EFIM. Coordinates with no information get an infinite bound."""
    m = E.entries if isinstance(E, FisherMatrix) else np.asarray(E, dtype=float)
    if m.shape != (3, 3):
        raise ValueError("EFIM must be 3x3 over (tau, f_D, theta_R)")
    d = np.diag(m)
    if np.any(d < 0):
        raise NumericalError("EFIM has a negative diagonal entry")
    dead = d == 0.0
    out = np.full(3, math.inf)
    live = np.flatnonzero(~dead)
    if live.size:
        blk = m[np.ix_(live, live)]
        s = np.sqrt(np.diag(blk))
        bn = blk / np.outer(s, s)
        w = np.linalg.eigvalsh(bn)
        if w[0] < -PSD_TOL * np.trace(bn):
            raise NumericalError(f"EFIM is indefinite (eigenvalue {w[0]:.3e})")
        if w[0] <= 1e-13:
            # a rank-deficient combination of live coordinates is not structural
            raise DegenerateSceneError("EFIM is singular in a non-structural direction")
        out[live] = np.diag(np.linalg.inv(bn)) / s**2
    return CrlbResult(float(out[0]), float(out[1]), float(out[2]), coupling)


# --------------------------------------------------------------------------
# coupling terms
# --------------------------------------------------------------------------


def compute_c0(sig: SampledSignal, tau: float = 0.0) -> complex:
    """``C0 = int s^*(t - tau) sdot(t - tau) dt``."""
    x, xd = _delayed(sig, tau)
    return complex(np.vdot(x, xd) * sig.dt)


def compute_im_c1(sig: SampledSignal, tau: float = 0.0) -> float:
    """``Im C1`` with ``C1 = int t sdot^*(t - tau) s(t - tau) dt`` on the centred axis."""
    x, xd = _delayed(sig, tau)
    return float(np.imag(np.sum(sig.t * xd.conj() * x) * sig.dt))


def coupling_report(sig: SampledSignal, tau: float = 0.0) -> dict:
    """``c0``, ``im_c1`` and the ``|Re C0|`` defect, which should vanish."""
    c0 = compute_c0(sig, tau)
    return {"c0": c0, "im_c1": compute_im_c1(sig, tau), "re_c0_defect": abs(c0.real)}


def crlb_numeric(
    spec: WaveformSpec, scene: SceneParams, fs: float | None = None, **synth_kw
) -> CrlbResult:
    """Numeric CRLBs plus the coupling report for one realization."""
    synth_kw.setdefault("tau_max", abs(scene.tau))
    sig = synthesize(spec, fs, **synth_kw)
    F = fim_from_signal(sig, scene)
    return crlb_from_efim(efim(F), coupling_report(sig, scene.tau))


def crlb_from_signal(sig: SampledSignal, scene: SceneParams) -> CrlbResult:
    F = fim_from_signal(sig, scene)
    return crlb_from_efim(efim(F), coupling_report(sig, scene.tau))


def crlb_from_draws(efims: Iterable[FisherMatrix]) -> CrlbResult:
    """CRLB of the draw-averaged EFIM.

    Closed forms use the expected spectrum and expected coupling terms, so the
    matching oracle averages information across symbol draws and inverts once.
    The mean of the per-draw bounds is kept in ``extras`` for comparison.
    """
    es = list(efims)
    if not es:
        raise ValueError("no draws to average")
    mean = FisherMatrix(np.mean([e.entries for e in es], axis=0), es[0].order)
    res = crlb_from_efim(mean)
    per = [crlb_from_efim(e) for e in es]
    extras = {
        "n_draws": len(es),
        "mean_of_bounds": {
            k: float(np.mean([getattr(r, k) for r in per])) for k in ("c_tau", "c_fd", "c_theta")
        },
    }
    return CrlbResult(res.c_tau, res.c_fd, res.c_theta, extras=extras)


# --------------------------------------------------------------------------
# CSV export
# --------------------------------------------------------------------------


def write_fim_csv(
    path: str | Path,
    F: FisherMatrix,
    E: FisherMatrix | None = None,
    crlb: CrlbResult | None = None,
) -> None:
    """``param_i,param_j,value`` rows for F (and E), then a ``crlb`` block."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["param_i", "param_j", "value"])
        for a, b, v in F.to_rows():
            w.writerow([a, b, repr(v)])
        if E is not None:
            for a, b, v in E.to_rows():
                w.writerow([f"efim:{a}", f"efim:{b}", repr(v)])
        if crlb is not None:
            w.writerow([])
            w.writerow(["crlb", "unit", "value"])
            for name, unit in (("c_tau", "s^2"), ("c_fd", "Hz^2"), ("c_theta", "rad^2")):
                w.writerow([name, unit, format_bound(getattr(crlb, name))])
