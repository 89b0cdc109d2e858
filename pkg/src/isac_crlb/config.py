"""Experiment configuration read from sectioned INI files.

Every quantity is linear unless its key ends in ``_db``. Omitted values
fall back to the default scenario: 10 dB ESNR, 400 MHz, 10 ms frame,
28 GHz carrier, 8 x 8 array.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from isac_crlb.errors import ConfigurationError
from isac_crlb.units import CarrierConfig, db_to_linear
from isac_crlb.waveform import (
    FMCW,
    OFDM,
    OTFS,
    PMCW,
    RC,
    RRC,
    PulseShape,
    Rect,
    Sinc,
    WaveformSpec,
    m_sequence,
    qpsk,
)

DEFAULT_GAMMA_DB = 10.0
DEFAULT_B = 400e6
DEFAULT_T_F = 10e-3
DEFAULT_F_C = 28e9
DEFAULT_N = 8


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator so every draw is reproducible from one 64-bit seed."""
    if not 0 <= int(seed) < 2**64:
        raise ConfigurationError("seed must fit in an unsigned 64-bit integer")
    return np.random.Generator(np.random.Philox(int(seed)))


def make_pulse(name: str, alpha: float | None = None) -> PulseShape:
    key = name.strip().lower()
    if key == "rect":
        return Rect()
    if key == "sinc":
        return Sinc()
    if key in ("rrc", "rc"):
        if alpha is None:
            raise ConfigurationError(f"{key.upper()} pulse needs a roll-off alpha")
        return RRC(alpha) if key == "rrc" else RC(alpha)
    raise ConfigurationError(f"unknown pulse {name!r}")


@dataclass(frozen=True)
class WaveformBlock:
    family: str = "ofdm"
    B: float = DEFAULT_B
    T_F: float = DEFAULT_T_F
    K: int = 64
    L: int = 64
    pulse: str = "rect"
    alpha: float | None = None
    L_cp: int = 0
    code_taps: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.family not in ("fmcw", "pmcw", "ofdm", "otfs"):
            raise ConfigurationError(f"unknown waveform family {self.family!r}")
        if not (self.B > 0 and self.T_F > 0):
            raise ConfigurationError("B and T_F must be positive")
        if self.K < 1 or self.L < 1:
            raise ConfigurationError("K and L must be >= 1")

    def pulse_shape(self) -> PulseShape:
        return make_pulse(self.pulse, self.alpha)

    def build(self, rng: np.random.Generator) -> WaveformSpec:
        """A concrete realization; random symbols and codes come from ``rng``."""
        if self.family == "fmcw":
            return FMCW(self.B, self.T_F / self.K, self.K)
        if self.family == "pmcw":
            p = self.pulse_shape()
            t_c = p.chip_period(self.B)
            if self.code_taps:
                code = m_sequence(self.code_taps)
            else:
                code = rng.choice([-1.0, 1.0], size=self.L)
            data = rng.choice([-1.0, 1.0], size=self.K)
            return PMCW(p, t_c, code, data)
        df = self.B / self.L
        if self.family == "ofdm":
            return OFDM(df, qpsk(rng, (self.K, self.L)), self.L_cp)
        return OTFS(df, qpsk(rng, (self.L, self.K)), self.L_cp)

    @property
    def random(self) -> bool:
        return self.family != "fmcw"


@dataclass(frozen=True)
class SceneBlock:
    gamma: float = db_to_linear(DEFAULT_GAMMA_DB)
    sigma2: float = 1.0
    theta_R: float = 0.0
    tau: float = 0.0
    f_D: float = 0.0
    f_c: float = DEFAULT_F_C

    def __post_init__(self):
        if not self.gamma > 0:
            raise ConfigurationError("ESNR must be positive")
        if not self.sigma2 > 0:
            raise ConfigurationError("sigma2 must be positive")
        if abs(self.theta_R) > math.pi / 2:
            raise ConfigurationError("theta_R must lie in [-pi/2, pi/2]")

    @property
    def carrier(self) -> CarrierConfig:
        return CarrierConfig(self.f_c)


@dataclass(frozen=True)
class ArrayBlock:
    N_T: int = DEFAULT_N
    N_R: int = DEFAULT_N

    def __post_init__(self):
        if self.N_T < 1 or self.N_R < 1:
            raise ConfigurationError("array sizes must be >= 1")


@dataclass(frozen=True)
class VaBlock:
    scheme: str | None = None
    beta: int | None = None


@dataclass(frozen=True)
class SweepBlock:
    """One swept parameter, either listed in ``values`` or as ``start/stop/steps``."""

    variable: str | None = None
    values: tuple[float, ...] = ()
    start: float | None = None
    stop: float | None = None
    steps: int | None = None
    log: str = "no"
    engine: str = "closed"

    def __post_init__(self):
        if self.engine not in ("closed", "numeric"):
            raise ConfigurationError("sweep engine must be 'closed' or 'numeric'")
        ranged = (self.start, self.stop, self.steps)
        if any(v is not None for v in ranged):
            if self.values or any(v is None for v in ranged):
                raise ConfigurationError("give either values or all of start, stop, steps")
            vals = sweep_values(self.start, self.stop, self.steps, self.log.lower() == "yes")
            object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class OutputBlock:
    directory: str = "out"
    formats: str = "csv"


@dataclass(frozen=True)
class RunBlock:
    seed: int = 0
    oversample: int = 4
    draws: int = 20
    fs: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "default"
    waveform: WaveformBlock = field(default_factory=WaveformBlock)
    scene: SceneBlock = field(default_factory=SceneBlock)
    array: ArrayBlock = field(default_factory=ArrayBlock)
    va: VaBlock = field(default_factory=VaBlock)
    sweep: SweepBlock = field(default_factory=SweepBlock)
    output: OutputBlock = field(default_factory=OutputBlock)
    run: RunBlock = field(default_factory=RunBlock)

    def with_value(self, variable: str, value: float) -> "ExperimentConfig":
        """Copy with one parameter overridden; ``variable`` is ``key`` or ``section.key``."""
        section, key = _locate(variable)
        block = getattr(self, section)
        key, value = _normalize(key, value)
        ftype = {f.name: f.type for f in dataclasses.fields(block)}[key]
        if "int" in str(ftype) and "float" not in str(ftype):
            if float(value) != int(value):
                raise ConfigurationError(f"{variable} must be an integer, got {value}")
            value = int(value)
        return dataclasses.replace(self, **{section: dataclasses.replace(block, **{key: value})})


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------

_SECTIONS = {
    "waveform": WaveformBlock,
    "scene": SceneBlock,
    "array": ArrayBlock,
    "va": VaBlock,
    "sweep": SweepBlock,
    "output": OutputBlock,
    "run": RunBlock,
}
_SWEEPABLE = ("waveform", "scene", "array", "va", "run")


def _normalize(key: str, value):
    """Map ``x_db`` keys onto their linear field."""
    if key.endswith("_db"):
        base = key[:-3]
        if base == "snr":
            raise ConfigurationError("snr_db needs n_s; use the [scene] section")
        return base, db_to_linear(float(value))
    return key, value


def _locate(variable: str) -> tuple[str, str]:
    if "." in variable:
        section, key = variable.split(".", 1)
        if section not in _SECTIONS:
            raise ConfigurationError(f"unknown section {section!r}")
        return section, key
    base = variable[:-3] if variable.endswith("_db") else variable
    hits = [s for s in _SWEEPABLE if base in {f.name for f in dataclasses.fields(_SECTIONS[s])}]
    if len(hits) != 1:
        raise ConfigurationError(f"cannot resolve parameter {variable!r}")
    return hits[0], variable


def _coerce(cls, key: str, raw: str):
    ftypes = {f.name: str(f.type) for f in dataclasses.fields(cls)}
    if key not in ftypes:
        raise ConfigurationError(f"unknown key {key!r} in [{cls.__name__}]")
    t = ftypes[key]
    try:
        if "tuple[int" in t:
            return tuple(int(v) for v in raw.replace(",", " ").split())
        if "tuple[float" in t:
            return tuple(float(v) for v in raw.replace(",", " ").split())
        if t.startswith("int") or t == "int | None":
            return int(raw)
        if "float" in t:
            return float(raw)
        return raw.strip()
    except ValueError as exc:
        raise ConfigurationError(f"bad value for {key}: {raw!r}") from exc


def _scene_values(sec: configparser.SectionProxy) -> dict:
    out = {}
    keys = set(sec.keys())
    gamma_keys = keys & {"gamma", "gamma_db"}
    snr_keys = keys & {"snr", "snr_db"}
    if len(gamma_keys) + len(snr_keys) > 1:
        raise ConfigurationError("give exactly one of gamma, gamma_db, snr, snr_db")
    for k in keys:
        raw = sec[k]
        if k in ("gamma_db", "snr_db"):
            try:
                out[k[:-3]] = db_to_linear(float(raw))
            except ValueError as exc:
                raise ConfigurationError(f"bad value for {k}: {raw!r}") from exc
        elif k in ("snr", "n_s"):
            try:
                out[k] = float(raw)
            except ValueError as exc:
                raise ConfigurationError(f"bad value for {k}: {raw!r}") from exc
        elif k.endswith("_db"):
            raise ConfigurationError(f"{k} has no dB form")
        else:
            out[k] = _coerce(SceneBlock, k, raw)
    if "snr" in out:
        n_s = out.pop("n_s", None)
        if n_s is None:
            raise ConfigurationError("snr requires n_s (samples per frame)")
        out["gamma"] = out.pop("snr") * n_s
    elif "n_s" in out:
        raise ConfigurationError("n_s is only meaningful together with snr")
    return out


def load_config(path: str | Path) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case sensitive (K vs k)
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from exc
    return parse_config(cp)


def parse_config(cp: configparser.ConfigParser) -> ExperimentConfig:
    blocks = {}
    name = "default"
    for sec in cp.sections():
        if sec == "scenario":
            name = cp[sec].get("name", name)
            continue
        if sec not in _SECTIONS:
            raise ConfigurationError(f"unknown section [{sec}]")
        if sec == "scene":
            blocks[sec] = SceneBlock(**_scene_values(cp[sec]))
            continue
        vals = {}
        for k, raw in cp[sec].items():
            if k.endswith("_db"):
                raise ConfigurationError(f"{k} has no dB form")
            vals[k] = _coerce(_SECTIONS[sec], k, raw)
        if sec == "waveform" and "family" in vals:
            vals["family"] = vals["family"].lower()
        blocks[sec] = _SECTIONS[sec](**vals)
    cfg = ExperimentConfig(name=name, **blocks)
    sw = cfg.sweep
    if sw.variable is not None:
        if not sw.values:
            raise ConfigurationError("sweep needs values")
        _locate(sw.variable)
    return cfg


def sweep_values(start: float, stop: float, steps: int, log: bool = False) -> tuple[float, ...]:
    if steps < 1:
        raise ConfigurationError("steps must be >= 1")
    if log:
        return tuple(np.geomspace(start, stop, steps).tolist())
    return tuple(np.linspace(start, stop, steps).tolist())
