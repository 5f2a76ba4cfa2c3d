"""System-level figures of merit measured on simulated traces."""

from __future__ import annotations

import math

from .dsp import beat_spectrum, detect_peaks, window
from .laser import ChirpConfig
from .receiver import IDEAL, HybridConfig, image_rejection_ratio, required_sample_rate, simulate_pixel
from .scene import C, beat_frequency, round_trip_delay

# Rayleigh criterion: the dip between two resolved sinc^2 responses falls to 8/pi^2 of the peaks
RAYLEIGH_DIP = 8 / math.pi**2


def theoretical_resolution(bandwidth: float) -> float:
    """Two-target range resolution ``c / (2B)``."""
    return C / (2 * bandwidth)


def auto_sample_rate(chirp: ChirpConfig, max_range: float, factor: float = 4.0) -> float:
    """``factor`` times the largest beat frequency, nudged so that ``fs * T`` is an integer."""
    fb = beat_frequency(max_range, chirp.slope)
    n = max(math.ceil(factor * fb * chirp.period), 64)
    fs = n / chirp.period
    need = required_sample_rate(chirp, round_trip_delay(max_range))
    while fs <= need:
        n += 1
        fs = n / chirp.period
    return fs


def two_target_trace(chirp: ChirpConfig, fs: float, R: float, separation: float,
                     phase: float = 0.0, hybrid: HybridConfig = IDEAL):
    """Noiseless trace of two equal reflectors at ``R`` and ``R + separation``."""
    resp = [(round_trip_delay(R), 1.0, 0.0), (round_trip_delay(R + separation), 1.0, phase)]
    return simulate_pixel(chirp, resp, fs, hybrid=hybrid)


def resolves(chirp: ChirpConfig, fs: float, R: float, separation: float,
             window_kind: str = "hann", zero_pad: int = 8) -> bool:
    """True when two equal targets ``separation`` apart show two distinct peaks."""
    tr = two_target_trace(chirp, fs, R, separation)
    return len(detect_peaks(beat_spectrum(window(tr, window_kind), zero_pad))) >= 2


def resolution_check(chirp: ChirpConfig, fs: float, R: float = 1.0) -> bool:
    """Resolved at ``c/(2B)`` and merged at a quarter of it."""
    d = theoretical_resolution(chirp.bandwidth)
    return resolves(chirp, fs, R, d) and not resolves(chirp, fs, R, 0.25 * d)


def _incoherent_dip(chirp, fs, R, separation, zero_pad):
    # averaging over four equally spaced relative phases cancels the cross term exactly
    p = 0.0
    for k in range(4):
        tr = two_target_trace(chirp, fs, R, separation, phase=k * math.pi / 2)
        p = p + beat_spectrum(tr, zero_pad).power()
    df = fs / len(p)
    k1 = int(round(beat_frequency(R, chirp.slope) / df))
    k2 = int(round(beat_frequency(R + separation, chirp.slope) / df))
    lo, hi = min(k1, k2), max(k1, k2)
    if hi - lo < 2:
        return 1.0
    seg = p[lo:hi + 1]
    return float(seg.min() / min(p[lo], p[hi]))


def rayleigh_resolution(chirp: ChirpConfig, R: float = 1.0, fs: float | None = None,
                        zero_pad: int = 16, rtol: float = 1e-3) -> float:
    """Measured two-target resolution in metres.

    Bisects on target separation until the phase-averaged two-target power
    spectrum (rectangular window) dips to the Rayleigh level between the two
    beat frequencies.
    """
    d = theoretical_resolution(chirp.bandwidth)
    if fs is None:
        fs = auto_sample_rate(chirp, R + 3 * d)
    lo, hi = 0.5 * d, 2.0 * d
    if _incoherent_dip(chirp, fs, R, hi, zero_pad) > RAYLEIGH_DIP:
        return math.inf
    while (hi - lo) > rtol * d:
        mid = 0.5 * (lo + hi)
        if _incoherent_dip(chirp, fs, R, mid, zero_pad) <= RAYLEIGH_DIP:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def measure_irr(chirp: ChirpConfig, hybrid: HybridConfig, R: float = 1.0, fs: float | None = None) -> float:
    """Image rejection of a noiseless single-target trace through ``hybrid``."""
    if fs is None:
        fs = auto_sample_rate(chirp, R)
    tr = simulate_pixel(chirp, [(round_trip_delay(R), 1.0, 0.0)], fs, hybrid=hybrid)
    return image_rejection_ratio(tr)

