"""Cramér–Rao bounds for delay, Doppler and angle of ISAC radar waveforms.

Closed-form evaluators live in :mod:`isac_crlb.crlb_closed`; the numeric
Fisher-information engine that cross-checks them lives in
:mod:`isac_crlb.fisher`.
"""

from isac_crlb.units import (
    C0,
    CarrierConfig,
    EsnrLinear,
    crlb_delay_to_range,
    crlb_doppler_to_velocity,
    db_to_linear,
    esnr_from_snr,
    linear_to_db,
)
from isac_crlb.waveform import (
    FMCW,
    OFDM,
    OTFS,
    PMCW,
    RC,
    RRC,
    Rect,
    SampledSignal,
    Sinc,
    apply_scene,
    otfs_to_tf,
    synthesize,
)
from isac_crlb.fisher import (
    ArrayConfig,
    CrlbResult,
    FisherMatrix,
    SceneParams,
    crlb_from_efim,
    efim,
    fim_numeric,
)

__version__ = "0.1.0"
