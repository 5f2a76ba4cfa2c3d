import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from iqimager.dsp import beat_spectrum, estimate_beat_frequency, window
from iqimager.exceptions import ConfigurationError
from iqimager.laser import ChirpConfig, PhaseNoiseConfig, phase_noise_path
from iqimager.receiver import (HybridConfig, balanced_detect, hybrid_outputs, image_rejection_ratio,
                               irr_closed_form, sigma_for_snr, simulate_pixel, simulate_pixel_beat)
from iqimager.scene import SinusoidDrift, beat_frequency, round_trip_delay

finite = st.floats(-10, 10, allow_nan=False)
cplx = st.builds(complex, finite, finite)


def test_hybrid_with_no_signal():
    lo = 0.3 - 0.7j
    out = hybrid_outputs(0, lo)
    for k in range(4):
        assert out[k] == pytest.approx(1j**k * lo / 2)


def test_hybrid_unit_inputs():
    out = hybrid_outputs(1, 1)
    assert out == pytest.approx(np.array([1, (1 + 1j) / 2, 0, (1 - 1j) / 2]))


@given(es=cplx, elo=cplx)
def test_ideal_hybrid_conserves_power(es, elo):
    # four ports of (Es + i^k Elo)/2: cross terms cancel, each port carries a quarter
    out = hybrid_outputs(es, elo)
    total = np.sum(np.abs(out) ** 2)
    oracle = sum(abs(es + 1j**k * elo) ** 2 for k in range(4)) / 4
    assert total == pytest.approx(oracle, rel=1e-12, abs=1e-12)
    assert total == pytest.approx(abs(es) ** 2 + abs(elo) ** 2, rel=1e-12, abs=1e-12)


def test_balanced_detect_examples():
    assert balanced_detect(hybrid_outputs(1, 1), 1.0) == pytest.approx((1, 0))
    assert balanced_detect(hybrid_outputs(1j, 1), 1.0) == pytest.approx((0, 1))


def test_conjugate_phase_identity_random_pairs():
    g = np.random.default_rng(2024)
    es = g.normal(size=1000) + 1j * g.normal(size=1000)
    elo = g.normal(size=1000) + 1j * g.normal(size=1000)
    r = 0.8
    i, q = balanced_detect(hybrid_outputs(es, elo), r)
    expected = r * es * np.conj(elo)
    assert np.max(np.abs((i + 1j * q) - expected) / np.abs(expected)) < 1e-12


@given(elo=cplx)
def test_carrier_suppression_without_signal(elo):
    i, q = balanced_detect(hybrid_outputs(0, elo), 1.0)
    assert i == 0 and q == 0


def test_imperfect_hybrid_q_branch():
    eps, alpha = 0.2, 0.1
    es, elo = 0.7 + 0.2j, 1.0
    i, q = balanced_detect(hybrid_outputs(es, elo, HybridConfig(eps, alpha)), 1.0)
    z = es * np.conj(elo)
    assert i == pytest.approx(z.real)
    assert q == pytest.approx((1 + alpha) * (z * np.exp(-1j * eps)).imag)


@pytest.mark.parametrize("kw", [dict(phase_error=2.0), dict(amplitude_imbalance=-1.0), dict(responsivity=0)])
def test_invalid_hybrid(kw):
    with pytest.raises(ConfigurationError):
        HybridConfig(**kw)


CH = ChirpConfig(f0=0, bandwidth=10e9, period=1e-3)


def test_zero_delay_gives_constant_iq():
    tr = simulate_pixel_beat(CH, 0.0, amp=0.5, fs=1e6, hybrid=HybridConfig(responsivity=2.0))
    mag2 = tr.i**2 + tr.q**2
    assert np.allclose(mag2, (2.0 * 0.5 * 1.0) ** 2, rtol=1e-12)
    assert np.ptp(tr.i) == 0 and np.ptp(tr.q) == 0


def test_beat_peak_at_expected_frequency():
    tr = simulate_pixel_beat(CH, round_trip_delay(1.0), fs=1e6)
    p = np.abs(np.fft.fft(tr.z)) ** 2
    k = int(np.argmax(p[: len(p) // 2]))
    df = tr.fs / len(tr)
    assert abs(k * df - 66713) <= df


def test_constant_drift_leaves_magnitude():
    tau = round_trip_delay(1.0)
    a = simulate_pixel_beat(CH, tau, theta=0.3, fs=1e6)
    b = simulate_pixel_beat(CH, tau, theta=0.3 + 1.234, fs=1e6)
    assert np.allclose(np.abs(a.z), np.abs(b.z), rtol=1e-12, atol=0)


def test_time_varying_drift_leaves_magnitude():
    tau = round_trip_delay(1.0)
    drift = SinusoidDrift(math.pi, 3e3)
    a = simulate_pixel(CH, [(tau, 1.0, 0.0)], 1e6)
    b = simulate_pixel(CH, [(tau, 1.0, 0.0)], 1e6, drift=drift)
    assert np.max(np.abs(np.abs(b.z) / np.abs(a.z) - 1)) < 1e-12
    # while the single quadrature alone fades
    assert np.max(np.abs(a.i - b.i)) > 0.5


def test_undersampling_names_required_rate():
    tau = round_trip_delay(1.0)
    with pytest.raises(ConfigurationError, match=r"fs > 146768"):
        simulate_pixel_beat(CH, tau, fs=1e5)


def test_delay_longer_than_chirp_rejected():
    with pytest.raises(ConfigurationError):
        simulate_pixel_beat(CH, 2e-3, fs=1e9)


def test_spectral_location_random_targets():
    g = np.random.default_rng(99)
    for _ in range(100):
        slope = 10 ** g.uniform(12, 14)
        cfg = ChirpConfig(bandwidth=slope * 1e-3, period=1e-3)
        R = g.uniform(0.1, 10)
        fs = 4 * beat_frequency(R, slope) + 2e4
        tr = simulate_pixel_beat(cfg, round_trip_delay(R), fs=fs)
        est = estimate_beat_frequency(beat_spectrum(window(tr, "hann")))
        assert abs(est.frequency - slope * round_trip_delay(R)) <= fs / len(tr)


def test_phase_noise_residual_uses_delayed_path():
    fs = 1e6
    tau = round_trip_delay(1000.0)  # long delay so the residual is visible
    cfg = ChirpConfig(bandwidth=1e6, period=1e-3)
    pn = phase_noise_path(1200, PhaseNoiseConfig(1e6, seed=3, dt=1 / fs), t0=-100 / fs)
    a = simulate_pixel(cfg, [(tau, 1.0, 0.0)], fs)
    b = simulate_pixel(cfg, [(tau, 1.0, 0.0)], fs, noise_path=pn)
    t = np.arange(len(a)) / fs
    resid = pn.at(t) - pn.at(t - tau)
    assert np.allclose(np.angle(b.z / a.z), np.angle(np.exp(1j * resid)), atol=1e-9)


def test_noise_level_from_snr():
    sigma = sigma_for_snr(10.0)
    assert 1 / (2 * sigma**2) == pytest.approx(10.0)


def test_irr_ideal_hybrid_exceeds_80_db():
    tr = simulate_pixel_beat(CH, round_trip_delay(1.0), fs=1e6)
    assert image_rejection_ratio(tr) >= 80


def test_irr_phase_error_matches_closed_form():
    eps = 0.1
    expected = 10 * math.log10(1 / math.tan(eps / 2) ** 2)
    assert expected == pytest.approx(26.0, abs=0.05)
    assert irr_closed_form(eps) == pytest.approx(expected, rel=1e-12)
    tr = simulate_pixel_beat(CH, round_trip_delay(1.0), fs=1e6, hybrid=HybridConfig(phase_error=eps))
    assert image_rejection_ratio(tr) == pytest.approx(26.0, abs=0.5)
    assert image_rejection_ratio(tr) == pytest.approx(expected, abs=0.05)


@pytest.mark.parametrize("eps,alpha", [(0.05, 0.0), (0.0, 0.1), (0.2, -0.2)])
def test_irr_closed_form_with_gain_error(eps, alpha):
    tr = simulate_pixel_beat(CH, round_trip_delay(1.3), fs=1e6, hybrid=HybridConfig(eps, alpha))
    assert image_rejection_ratio(tr) == pytest.approx(irr_closed_form(eps, alpha), abs=0.05)


def test_irr_single_quadrature_is_zero_db():
    tr = simulate_pixel_beat(CH, round_trip_delay(1.0), fs=1e6)
    real_only = tr.with_samples(tr.i, np.zeros(len(tr)))
    assert image_rejection_ratio(real_only) == pytest.approx(0.0, abs=1e-9)


def test_irr_needs_a_tone():
    from iqimager.exceptions import AnalysisError
    from iqimager.traces import IqTrace

    with pytest.raises(AnalysisError):
        image_rejection_ratio(IqTrace(np.zeros(64), np.zeros(64), 1e3))
