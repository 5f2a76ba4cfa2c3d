"""Swept-source laser: FMCW chirp phase and Wiener phase noise."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .exceptions import ConfigurationError

DIRECTIONS = ("up", "down", "triangular")


@dataclass(frozen=True)
class ChirpConfig:
    """Linear frequency sweep.

    Attributes:
        f0: start frequency in Hz. Set it to 0 to simulate directly at
            beat-frequency rates; only phase differences reach the detector.
        bandwidth: sweep excursion B in Hz.
        period: sweep duration T in seconds.
        direction: ``"up"``, ``"down"`` or ``"triangular"`` (up over
            ``[0, T]`` then down over ``[T, 2T]``).
    """

    f0: float = 0.0
    bandwidth: float = 600e9
    period: float = 1e-3
    direction: str = "up"

    def __post_init__(self):
        if not (math.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise ConfigurationError(f"bandwidth must be > 0 Hz, got {self.bandwidth!r}")
        if not (math.isfinite(self.period) and self.period > 0):
            raise ConfigurationError(f"period must be > 0 s, got {self.period!r}")
        if not (math.isfinite(self.f0) and self.f0 >= 0):
            raise ConfigurationError(f"f0 must be >= 0 Hz, got {self.f0!r}")
        if self.direction not in DIRECTIONS:
            raise ConfigurationError(
                f"direction must be one of {DIRECTIONS}, got {self.direction!r}"
            )
        if not (math.isfinite(self.slope) and self.slope > 0):
            raise ConfigurationError(f"chirp slope B/T is not finite and positive: {self.slope!r}")

    @property
    def slope(self) -> float:
        return self.bandwidth / self.period


def chirp_slope(cfg: ChirpConfig) -> float:
    """Sweep rate in Hz/s."""
    if not isinstance(cfg, ChirpConfig):
        raise ConfigurationError(f"expected ChirpConfig, got {type(cfg).__name__}")
    return cfg.bandwidth / cfg.period


def _fold(t, cfg: ChirpConfig):
    t = np.asarray(t, dtype=float)
    T = cfg.period
    if cfg.direction == "triangular":
        if np.any(t < 0):
            raise ValueError("chirp time must be >= 0")
        return np.mod(t, 2 * T)
    # small slack so that t = n/fs rounding at the sweep end is accepted
    if np.any(t < 0) or np.any(t > T * (1 + 1e-12)):
        raise ValueError(f"chirp time outside the sweep [0, {T}] s")
    return t


def chirp_phase(t, cfg: ChirpConfig):
    """Transmitted phase in radians at time(s) ``t`` within one sweep.

    Up-sweep: ``2*pi*f0*t + pi*slope*t**2``. Down-sweep starts at
    ``f0 + B`` and falls. Triangular sweeps fold ``t`` modulo ``2T``; the
    phase is continuous across the turn-around at ``T``.
    """
    tf = _fold(t, cfg)
    g = cfg.slope
    f0, B, T = cfg.f0, cfg.bandwidth, cfg.period

    def up(x):
        return 2 * np.pi * f0 * x + np.pi * g * x**2

    def down(x):
        return 2 * np.pi * (f0 + B) * x - np.pi * g * x**2

    if cfg.direction == "up":
        out = up(tf)
    elif cfg.direction == "down":
        out = down(tf)
    else:
        tail = tf - T
        out = np.where(tf <= T, up(tf), up(T) + down(np.maximum(tail, 0.0)))
    return out if np.ndim(out) else float(out)


def chirp_frequency(t, cfg: ChirpConfig):
    """Instantaneous frequency in Hz (derivative of :func:`chirp_phase` / 2pi)."""
    tf = _fold(t, cfg)
    g = cfg.slope
    if cfg.direction == "up":
        out = cfg.f0 + g * tf
    elif cfg.direction == "down":
        out = cfg.f0 + cfg.bandwidth - g * tf
    else:
        T = cfg.period
        out = np.where(tf <= T, cfg.f0 + g * tf, cfg.f0 + cfg.bandwidth - g * (tf - T))
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class PhaseNoiseConfig:
    """Lorentzian-linewidth laser phase noise.

    ``linewidth`` is the full width at half maximum in Hz, ``dt`` the sample
    interval of generated paths and ``seed`` keys the counter-based stream.
    """

    linewidth: float = 0.0
    seed: int = 0
    dt: float = 1e-9

    def __post_init__(self):
        if not (math.isfinite(self.linewidth) and self.linewidth >= 0):
            raise ConfigurationError(f"linewidth must be >= 0 Hz, got {self.linewidth!r}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigurationError(f"dt must be > 0 s, got {self.dt!r}")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")

    @property
    def increment_variance(self) -> float:
        return 2 * np.pi * self.linewidth * self.dt


@dataclass(frozen=True, eq=False)
class PhaseNoisePath:
    """A sampled phase random walk; ``samples[k]`` is the phase at ``t0 + k*dt``."""

    samples: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return (len(self.samples) - 1) * self.dt

    def at(self, t):
        """Phase at arbitrary times by linear interpolation between samples."""
        t = np.asarray(t, dtype=float)
        x = (t - self.t0) / self.dt
        last = len(self.samples) - 1
        if np.any(x < -1e-9) or np.any(x > last + 1e-9):
            raise ValueError(
                f"time outside the phase-noise path [{self.t0}, {self.t0 + last * self.dt}] s"
            )
        x = np.clip(x, 0, last)
        k = np.minimum(np.floor(x).astype(np.int64), max(last - 1, 0))
        frac = x - k
        s = self.samples
        if last == 0:
            return np.full(t.shape, s[0])
        return s[k] * (1 - frac) + s[k + 1] * frac


def phase_noise_path(n: int, cfg: PhaseNoiseConfig, stream: int = 0, t0: float = 0.0,
                     kind: int = rng.LASER_PHASE) -> PhaseNoisePath:
    """Wiener phase path of ``n`` samples starting at zero.

    Increments are independent ``N(0, 2*pi*linewidth*dt)`` draws from the
    counter-based stream ``(cfg.seed, kind, stream)``. Different ``stream``
    values give independent realisations for the same seed.
    """
    if int(n) != n or n < 1:
        raise ConfigurationError(f"path length must be >= 1, got {n!r}")
    n = int(n)
    if cfg.linewidth == 0:
        return PhaseNoisePath(np.zeros(n), cfg.dt, t0)
    g = rng.stream(cfg.seed, rng.stream_id(kind, stream))
    steps = g.standard_normal(n - 1) * math.sqrt(cfg.increment_variance)
    samples = np.empty(n)
    samples[0] = 0.0
    np.cumsum(steps, out=samples[1:])
    return PhaseNoisePath(samples, cfg.dt, t0)
