import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from isac_crlb.errors import ConfigurationError, SamplingError, TruncationError
from isac_crlb.scene import ArrayConfig, SceneParams
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
    m_sequence,
    otfs_to_tf,
    qpsk,
    random_ofdm,
    random_otfs,
    random_pmcw,
    read_signal,
    synthesize,
    synthesize_like,
    write_signal,
)

B = 4e6


def _frame(sig):
    """Mask of samples inside the frame proper."""
    return np.abs(sig.samples) > 0


def _centroid_ok(sig, T_F):
    p = np.abs(sig.samples) ** 2
    return abs(sig.dt * np.dot(sig.t, p)) <= 1e-6 * sig.energy * T_F


# --------------------------------------------------------------------------
# SampledSignal
# --------------------------------------------------------------------------


def test_sampled_signal_energy_and_readonly():
    x = np.exp(1j * np.linspace(0, 3, 101))
    sig = SampledSignal(x, fs=10.0, t0_offset=-5.0)
    assert_allclose(sig.energy, np.sum(np.abs(x) ** 2) / 10.0, rtol=1e-10)
    with pytest.raises(ValueError):
        sig.samples[0] = 0
    x[0] = 99  # caller's buffer is copied
    assert sig.samples[0] != 99
    assert_allclose(sig.t[[0, -1]], [-5.0, 5.0])


def test_binary_roundtrip(tmp_path, desk_fmcw):
    sig = synthesize(desk_fmcw)
    path = tmp_path / "s.bin"
    write_signal(path, sig)
    raw = path.read_bytes()
    assert len(raw) == 24 + 16 * len(sig)
    back = read_signal(path)
    assert_array_equal(back.samples, sig.samples)
    assert back.fs == sig.fs and back.t0_offset == sig.t0_offset


def test_binary_truncated_file(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"\x00" * 10)
    with pytest.raises(ConfigurationError):
        read_signal(p)


# --------------------------------------------------------------------------
# synthesis examples
# --------------------------------------------------------------------------


def test_fmcw_zero_sweep_is_rect_burst():
    T = 1e-4
    sig = synthesize(FMCW(0.0, T, 1), fs=1e6)
    on = sig.samples[_frame(sig)]
    assert_allclose(on, 1.0)
    assert_allclose(sig.energy, T, rtol=1e-12)


def test_ofdm_single_tone_dc():
    df = 1e3
    sig = synthesize(OFDM(df, [[1.0]]), fs=4 * df)
    on = sig.samples[_frame(sig)]
    assert on.size == 4
    assert_allclose(on, 1.0, atol=1e-12)


def test_pmcw_msequence_energy():
    code = m_sequence((3, 2))
    assert code.size == 7
    t_c = 1e-6
    sig = synthesize(PMCW(Rect(mainlobe_only=False), t_c, code, [1.0]), fs=8 / t_c)
    assert_allclose(sig.energy, 7 * t_c, rtol=1e-6)


@pytest.mark.parametrize("taps", [(3, 2), (5, 3), (6, 5), (7, 6)])
def test_m_sequence_autocorrelation(taps):
    c = m_sequence(taps)
    n = c.size
    assert n == 2 ** max(taps) - 1
    acf = np.array([np.dot(c, np.roll(c, s)) for s in range(n)])
    assert acf[0] == n
    assert_array_equal(acf[1:], -1)


def test_ofdm_matches_analytic_with_cp():
    df, L, L_cp, K = 1e3, 4, 2, 2
    X = np.zeros((K, L), complex)
    X[0, 3] = 1.0
    X[1, 1] = 1j
    spec = OFDM(df, X, L_cp)
    fs = 8 * L * df
    sig = synthesize(spec, fs=fs)
    t = sig.t + sig.frame_centroid  # frame time
    ref = np.zeros(len(sig), complex)
    f0 = spec.f0
    for k in range(K):
        start = k * spec.T_s
        for l in range(L):
            if X[k, l] == 0:
                continue
            u = t - start - spec.T_cp
            on = (t >= start) & (t < start + spec.T_s)
            # CP holds the tail of the useful part
            u = np.where(u < 0, u + spec.T, u)
            ref += np.where(on, X[k, l] * np.exp(2j * np.pi * (l * df - f0) * u), 0)
    assert_allclose(sig.samples, ref, atol=1e-9)


def test_ofdm_rejects_fractional_samples():
    with pytest.raises(SamplingError):
        synthesize(OFDM(1e3, np.ones((1, 4))), fs=4.5e3)


def test_sampling_below_bandwidth():
    with pytest.raises(SamplingError):
        synthesize(FMCW(B, 64e-6, 2), fs=0.5 * B)


def test_empty_data_rejected():
    with pytest.raises(ConfigurationError):
        PMCW(Sinc(), 1e-6, [1, -1], [])
    with pytest.raises(ConfigurationError):
        OFDM(1e3, np.zeros((0, 4)))


def test_non_binary_chips_rejected():
    with pytest.raises(ConfigurationError):
        PMCW(Sinc(), 1e-6, [1, 0.5], [1])


def test_fmcw_data_must_be_unit_modulus():
    with pytest.raises(ConfigurationError):
        FMCW(B, 1e-5, 2, data=[1.0, 2.0])
    FMCW(B, 1e-5, 2, data=[1.0, 1j])


# --------------------------------------------------------------------------
# invariants
# --------------------------------------------------------------------------


def _specs(rng):
    yield FMCW(B, 64e-6, 8)
    for p in (Rect(), Rect(False), Sinc(), RRC(0.5), RC(0.3)):
        yield random_pmcw(rng, p, p.chip_period(B), 16, 8)
    yield random_ofdm(rng, B / 16, 16, 8, L_cp=4)
    yield random_otfs(rng, B / 16, 16, 8)


def test_centroid_and_energy_invariants(rng):
    for spec in _specs(rng):
        sig = synthesize(spec)
        assert _centroid_ok(sig, spec.frame_length), spec
        assert_allclose(sig.energy, sig.dt * np.sum(np.abs(sig.samples) ** 2), rtol=1e-10)
        assert abs(sig.centroid) <= 1e-6 * spec.frame_length


def test_constant_envelope_energy(rng):
    fm = FMCW(B, 64e-6, 8)
    sig = synthesize(fm)
    assert_allclose(sig.energy, fm.frame_length, rtol=1e-3)
    p = np.abs(sig.samples[_frame(sig)]) ** 2
    assert_allclose(p, 1.0, atol=1e-9)
    pm = random_pmcw(rng, Rect(False), 1e-6, 15, 4)
    sig = synthesize(pm)
    assert_allclose(np.abs(sig.samples[_frame(sig)]) ** 2, 1.0, atol=1e-9)
    assert_allclose(sig.energy, pm.frame_length, rtol=1e-3)


def test_ofdm_frame_length_includes_cp():
    spec = OFDM(1e3, np.ones((4, 8)), L_cp=2)
    assert_allclose(spec.T_cp, 0.25e-3)
    assert_allclose(spec.frame_length, 4 * 1.25e-3)
    assert_allclose(spec.f0, 3.5e3)


def test_synthesize_like_shares_axis(rng):
    spec = random_pmcw(rng, RRC(0.5), RRC(0.5).chip_period(B), 8, 4)
    sig = synthesize(spec)
    again = synthesize_like(spec, sig)
    assert_allclose(again.samples, sig.samples, atol=1e-14)
    assert again.t0_offset == sig.t0_offset


# --------------------------------------------------------------------------
# pulses
# --------------------------------------------------------------------------


@pytest.mark.parametrize("pulse", [Rect(), Sinc(), RRC(0.0), RRC(0.35), RRC(1.0), RC(0.2), RC(1.0)])
def test_pulse_spectrum_integrates_to_one(pulse):
    t_c = 1.0
    f = np.linspace(-1.2 * pulse.bandwidth(t_c), 1.2 * pulse.bandwidth(t_c), 200001)
    assert_allclose(np.trapezoid(pulse.spectrum(f, t_c), f), 1.0, rtol=1e-4)


@pytest.mark.parametrize("pulse", [Rect(), Sinc(), RRC(0.25), RRC(1.0), RC(0.25), RC(1.0)])
def test_pulse_impulse_energy(pulse):
    t = np.linspace(-400, 400, 800001)
    g = pulse.impulse(t, 1.0)
    assert np.all(np.isfinite(g))
    assert_allclose(np.trapezoid(g**2, t), 1.0, rtol=2e-3)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0])
def test_pulse_singular_points_are_limits(alpha):
    for pulse in (RRC(alpha), RC(alpha)):
        pole = 1 / (4 * alpha) if isinstance(pulse, RRC) else 1 / (2 * alpha)
        eps = 1e-7
        g = pulse.impulse(np.array([pole - eps, pole, pole + eps, 0.0, eps]), 1.0)
        assert_allclose(g[1], 0.5 * (g[0] + g[2]), rtol=1e-5, atol=1e-9)
        assert_allclose(g[3], g[4], rtol=1e-6)


def test_rrc_zero_rolloff_is_sinc():
    t = np.linspace(-5, 5, 1001)
    assert_allclose(RRC(0.0).impulse(t, 1.0), Sinc().impulse(t, 1.0), atol=1e-12)


def test_rc_requires_positive_rolloff():
    with pytest.raises(ConfigurationError):
        RC(0.0)
    with pytest.raises(ConfigurationError):
        RRC(1.5)


# --------------------------------------------------------------------------
# OTFS mapping
# --------------------------------------------------------------------------


def test_isfft_examples():
    L, K = 4, 6
    assert_array_equal(otfs_to_tf(np.zeros((L, K))), 0)
    x = np.zeros((L, K))
    x[0, 0] = 1
    X = otfs_to_tf(x)
    assert X.shape == (K, L)
    assert_allclose(X, 1 / math.sqrt(K * L))


def test_isfft_matches_definition(rng):
    L, K = 5, 3
    x = qpsk(rng, (L, K))
    X = otfs_to_tf(x)
    mu, nu = np.meshgrid(np.arange(L), np.arange(K), indexing="ij")
    for k in range(K):
        for l in range(L):
            ref = np.sum(x * np.exp(2j * np.pi * (k * nu / K - l * mu / L))) / math.sqrt(K * L)
            assert_allclose(X[k, l], ref, atol=1e-12)


@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_isfft_unitary(L, K, seed):
    x = np.random.default_rng(seed).standard_normal((L, K, 2)) @ [1, 1j]
    assert_allclose(np.linalg.norm(otfs_to_tf(x)), np.linalg.norm(x), rtol=1e-10)


def test_isfft_second_order_statistics(rng):
    L = K = 16
    n = 2000
    acc = np.zeros((K * L, K * L), complex)
    for _ in range(n):
        X = otfs_to_tf(qpsk(rng, (L, K))).ravel()
        acc += np.outer(X, X.conj())
    C = acc / n
    # i.i.d. unit-power symbols: covariance should be the identity
    assert_allclose(np.diag(C).real, 1.0, atol=6 / math.sqrt(n))
    off = C - np.diag(np.diag(C))
    assert np.max(np.abs(off)) < 6 / math.sqrt(n)


def test_otfs_and_ofdm_views_agree(rng):
    spec = random_otfs(rng, B / 8, 8, 4)
    a = synthesize(spec)
    b = synthesize(spec.as_ofdm())
    assert_allclose(a.samples, b.samples)


# --------------------------------------------------------------------------
# scene application
# --------------------------------------------------------------------------


def test_identity_scene_is_bitwise(desk_fmcw):
    sig = synthesize(desk_fmcw)
    (out,) = apply_scene(sig, SceneParams())
    assert_array_equal(out.samples, sig.samples)


def test_doppler_is_phase_ramp():
    df = 1e3
    spec = OFDM(df, qpsk(np.random.default_rng(1), (2, 8)))
    sig = synthesize(spec, fs=32 * df)
    (out,) = apply_scene(sig, SceneParams(f_D=df))
    ramp = np.exp(2j * np.pi * df * (sig.t + sig.frame_centroid))
    assert_allclose(out.samples, sig.samples * ramp, atol=1e-13)


def test_ula_phase_increment(desk_fmcw):
    sig = synthesize(desk_fmcw)
    scene = SceneParams(theta_R=math.pi / 6, array=ArrayConfig(N_R=4))
    br = apply_scene(sig, scene)
    n = np.argmax(np.abs(sig.samples))
    ph = np.angle(br[1].samples[n] / br[0].samples[n])
    assert_allclose(ph, -math.pi / 2, atol=1e-12)
    assert_allclose(np.angle(br[3].samples[n] / br[2].samples[n]), -math.pi / 2, atol=1e-12)


def test_delay_beyond_guard_refused(desk_fmcw):
    sig = synthesize(desk_fmcw)
    with pytest.raises(TruncationError):
        apply_scene(sig, SceneParams(tau=2 * sig.guard))
    wide = synthesize(desk_fmcw, tau_max=1e-4)
    assert wide.guard >= 2e-4
    apply_scene(wide, SceneParams(tau=1e-4))


def test_delay_is_spectral_shift(rng):
    spec = random_pmcw(rng, RRC(0.5), RRC(0.5).chip_period(B), 8, 2)
    sig = synthesize(spec)
    d = 3 / sig.fs
    (out,) = apply_scene(sig, SceneParams(tau=d))
    assert_allclose(out.samples, np.roll(sig.samples, 3), atol=1e-10)
