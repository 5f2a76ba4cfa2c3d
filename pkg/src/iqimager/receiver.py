"""90-degree hybrid, balanced photodetection and per-pixel beat synthesis.

Sign convention: the hybrid's port ``k`` carries ``(E_s + e^{jk*pi/2} E_lo)/2``
and the two balanced pairs are ``(0, 2)`` for I and ``(1, 3)`` for Q, so an
ideal receiver delivers ``I + jQ = R_pd * E_s * conj(E_lo)``. The signal
field is written in the LO's rotating frame with the sign chosen so that an
up-chirp echo lands at a positive beat frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import AnalysisError, ConfigurationError
from .laser import ChirpConfig, PhaseNoisePath
from .traces import IqTrace

SAMPLING_MARGIN = 0.1


@dataclass(frozen=True)
class HybridConfig:
    """Hybrid imperfections, applied to the quadrature pair only.

    ``phase_error`` shifts the Q branch away from 90 degrees (radians);
    ``amplitude_imbalance`` scales the Q photocurrent by ``1 + alpha``.
    Common-mode errors cancel in balanced detection and are not modelled.
    """

    phase_error: float = 0.0
    amplitude_imbalance: float = 0.0
    responsivity: float = 1.0

    def __post_init__(self):
        if not abs(self.phase_error) < np.pi / 2:
            raise ConfigurationError(f"|phase_error| must be < pi/2, got {self.phase_error!r}")
        if not self.amplitude_imbalance > -1:
            raise ConfigurationError(
                f"amplitude_imbalance must be > -1, got {self.amplitude_imbalance!r}"
            )
        if not (math.isfinite(self.responsivity) and self.responsivity > 0):
            raise ConfigurationError(f"responsivity must be > 0 A/W, got {self.responsivity!r}")

    @property
    def ideal(self) -> bool:
        return self.phase_error == 0 and self.amplitude_imbalance == 0


IDEAL = HybridConfig()


@dataclass(frozen=True)
class NoiseConfig:
    """White Gaussian noise added independently to I and Q (std ``sigma``)."""

    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ConfigurationError(f"noise sigma must be >= 0, got {self.sigma!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


def sigma_for_snr(snr_db: float, amplitude: float = 1.0, lo_amplitude: float = 1.0,
                  responsivity: float = 1.0) -> float:
    """Per-quadrature noise std giving a per-sample SNR of ``snr_db``.

    SNR here is ``|I + jQ|**2 / (2 * sigma**2)`` for a noiseless tone of the
    given amplitude, i.e. before any FFT processing gain.
    """
    z = responsivity * amplitude * lo_amplitude
    return z / math.sqrt(2 * 10 ** (snr_db / 10))


def irr_closed_form(phase_error: float, amplitude_imbalance: float = 0.0) -> float:
    """Image rejection ratio in dB of a hybrid with the given Q-branch errors.

    With ``alpha = 0`` this reduces to ``10*log10(cot(eps/2)**2)``.
    """
    g = 1 + amplitude_imbalance
    c = math.cos(phase_error)
    den = 1 - 2 * g * c + g * g
    if den == 0:
        return math.inf
    return 10 * math.log10((1 + 2 * g * c + g * g) / den)


def hybrid_outputs(E_s, E_lo, cfg: HybridConfig = IDEAL) -> np.ndarray:
    """Four output fields, stacked along a new leading axis.

    Port k is ``(E_s + e^{jk*pi/2} E_lo) / 2``. For the quadrature ports
    (k = 1, 3) the LO term picks up ``e^{j*eps}`` and both fields are scaled
    by ``sqrt(1 + alpha)`` so the Q photocurrent carries gain ``1 + alpha``.
    """
    E_s = np.asarray(E_s, dtype=complex)
    E_lo = np.asarray(E_lo, dtype=complex)
    if not (np.all(np.isfinite(E_s)) and np.all(np.isfinite(E_lo))):
        raise ValueError("hybrid inputs must be finite")
    E_s, E_lo = np.broadcast_arrays(E_s, E_lo)
    out = np.empty((4,) + E_s.shape, dtype=complex)
    out[0] = (E_s + E_lo) / 2
    out[2] = (E_s - E_lo) / 2
    if cfg.ideal:
        out[1] = (E_s + 1j * E_lo) / 2
        out[3] = (E_s - 1j * E_lo) / 2
    else:
        lo_q = 1j * np.exp(1j * cfg.phase_error) * E_lo
        gain = math.sqrt(1 + cfg.amplitude_imbalance)
        out[1] = gain * (E_s + lo_q) / 2
        out[3] = gain * (E_s - lo_q) / 2
    return out


def balanced_detect(fields, responsivity: float = 1.0):
    """Subtract complementary photocurrents: ``I = R(|E0|^2 - |E2|^2)``, ``Q = R(|E1|^2 - |E3|^2)``.

    The ``|E_s|^2`` and ``|E_lo|^2`` terms appear equally in both diodes of
    a pair and cancel, leaving only the beat between signal and LO.
    """
    f = np.asarray(fields)
    if f.shape[0] != 4:
        raise ValueError(f"expected 4 hybrid outputs, got {f.shape[0]}")
    p = f.real**2 + f.imag**2
    return responsivity * (p[0] - p[2]), responsivity * (p[1] - p[3])


def required_sample_rate(cfg: ChirpConfig, tau: float, margin: float = SAMPLING_MARGIN) -> float:
    return 2 * cfg.slope * tau * (1 + margin)


def check_sampling(cfg: ChirpConfig, tau: float, fs: float, margin: float = SAMPLING_MARGIN):
    if not tau < cfg.period:
        raise ConfigurationError(
            f"round-trip delay {tau:.6g} s must be shorter than the chirp period {cfg.period:.6g} s"
        )
    need = required_sample_rate(cfg, tau, margin)
    if not fs > need:
        raise ConfigurationError(
            f"sample rate {fs:.6g} Hz undersamples the beat; need fs > {need:.6g} Hz"
        )


def sample_times(cfg: ChirpConfig, fs: float) -> np.ndarray:
    n = int(round(cfg.period * fs))
    if n < 1:
        raise ConfigurationError(f"fs={fs} Hz gives no samples in a {cfg.period} s chirp")
    return np.arange(n) / fs


def signal_field(
    cfg: ChirpConfig,
    responses: Sequence[tuple[float, float, float]],
    t: np.ndarray,
    *,
    drift=None,
    drift_sampling: str = "sample",
    t_start: float = 0.0,
    noise_path: PhaseNoisePath | None = None,
) -> np.ndarray:
    """Complex signal-arm field relative to the LO at local times ``t``.

    Each echo ``(tau, amp, theta)`` contributes ``amp * exp(j*dphi)`` with
    ``dphi = 2*pi*slope*tau*t - pi*slope*tau**2 + theta + drift + (pn(t) - pn(t - tau))``.
    """
    g = cfg.slope
    E = np.zeros(t.shape, dtype=complex)
    if drift is None:
        d = 0.0
    elif drift_sampling == "chirp":
        d = float(np.asarray(drift(np.array([t_start])))[0])
    else:
        d = np.asarray(drift(t_start + t), dtype=float)
    pn_now = noise_path.at(t) if noise_path is not None else None
    for tau, amp, theta in responses:
        dphi = 2 * np.pi * g * tau * t - np.pi * g * tau * tau + theta + d
        if noise_path is not None:
            dphi = dphi + (pn_now - noise_path.at(t - tau))
        E += amp * np.exp(1j * dphi)
    return E


def detect(E_s, hybrid: HybridConfig = IDEAL, lo_amplitude: float = 1.0):
    """Run a signal field through the hybrid and balanced pairs; returns ``(I, Q)``."""
    E_lo = np.full(np.shape(E_s), lo_amplitude, dtype=complex)
    return balanced_detect(hybrid_outputs(E_s, E_lo, hybrid), hybrid.responsivity)


def add_noise(i, q, sigma: float, gen: np.random.Generator | None):
    if sigma == 0:
        return i, q
    if gen is None:
        raise ValueError("a random generator is required when sigma > 0")
    w = gen.standard_normal((2, len(i)))
    return i + sigma * w[0], q + sigma * w[1]


def simulate_pixel(
    cfg: ChirpConfig,
    responses: Sequence[tuple[float, float, float]],
    fs: float,
    *,
    hybrid: HybridConfig = IDEAL,
    drift=None,
    drift_sampling: str = "sample",
    noise_path: PhaseNoisePath | None = None,
    sigma: float = 0.0,
    gen: np.random.Generator | None = None,
    t_start: float = 0.0,
    lo_amplitude: float = 1.0,
    pixel=None,
    chirp: int = 0,
) -> IqTrace:
    """IQ trace for any number of echoes in one pixel during one chirp."""
    for tau, _, _ in responses:
        check_sampling(cfg, tau, fs)
    t = sample_times(cfg, fs)
    E_s = signal_field(cfg, responses, t, drift=drift, drift_sampling=drift_sampling,
                       t_start=t_start, noise_path=noise_path)
    i, q = detect(E_s, hybrid, lo_amplitude)
    i, q = add_noise(i, q, sigma, gen)
    return IqTrace(i, q, fs, pixel, chirp)


def simulate_pixel_beat(
    cfg: ChirpConfig,
    tau: float,
    amp: float = 1.0,
    theta: float = 0.0,
    drift=None,
    noise_path: PhaseNoisePath | None = None,
    hybrid: HybridConfig = IDEAL,
    fs: float = 1e6,
    **kw,
) -> IqTrace:
    """Single-echo convenience wrapper around :func:`simulate_pixel`."""
    return simulate_pixel(cfg, [(tau, amp, theta)], fs, hybrid=hybrid, drift=drift,
                          noise_path=noise_path, **kw)


def image_rejection_ratio(trace: IqTrace, window: str = "hann", zero_pad: int = 2) -> float:
    """Power at the dominant positive beat over power at its mirror, in dB.

    Both sides sum the peak bin and its two neighbours; for a real window the
    image's spectral shape is the mirror of the tone's, so the ratio is not
    biased by scalloping.
    """
    from .dsp import beat_spectrum, window as apply_window

    spec = beat_spectrum(apply_window(trace, window), zero_pad=zero_pad)
    p = spec.power()
    n = len(p)
    half = n // 2
    pos = p[1:half]
    if pos.size < 3 or not np.max(pos) > 0:
        raise AnalysisError("no detectable positive-frequency tone")
    k = int(np.argmax(pos)) + 1
    near = np.arange(k - 1, k + 2) % n
    tone = p[near].sum()
    image = p[(-near) % n].sum()
    if image == 0:
        return math.inf
    return 10 * math.log10(tone / image)
