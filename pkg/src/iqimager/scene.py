"""Static point-target scenes and relative-path phase drift."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .exceptions import ConfigurationError
from .laser import PhaseNoisePath

C = 299_792_458.0  # m/s


@dataclass(frozen=True)
class Target:
    """Ideal point reflector seen by one pixel."""

    range: float
    reflectivity: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.range) and self.range > 0):
            raise ConfigurationError(f"target range must be > 0 m, got {self.range!r}")
        if not 0 <= self.reflectivity <= 1:
            raise ConfigurationError(f"reflectivity must be in [0, 1], got {self.reflectivity!r}")
        if not math.isfinite(self.phase):
            raise ConfigurationError(f"target phase must be finite, got {self.phase!r}")


# Drift models. Each is a callable of absolute frame time (s) returning radians,
# applied to the signal arm only.


@dataclass(frozen=True)
class ConstantDrift:
    offset: float = 0.0

    def __call__(self, t):
        return np.full(np.shape(t), self.offset, dtype=float)


@dataclass(frozen=True)
class RampDrift:
    rate: float  # rad/s
    offset: float = 0.0

    def __call__(self, t):
        return self.offset + self.rate * np.asarray(t, dtype=float)


@dataclass(frozen=True)
class SinusoidDrift:
    amplitude: float  # rad
    frequency: float  # Hz
    phase: float = 0.0

    def __call__(self, t):
        return self.amplitude * np.sin(2 * np.pi * self.frequency * np.asarray(t, dtype=float) + self.phase)


@dataclass(frozen=True)
class ReplayDrift:
    """Replays a recorded phase path (e.g. a second, independent phase-noise walk)."""

    path: PhaseNoisePath

    def __call__(self, t):
        return self.path.at(t)


Drift = Callable[[np.ndarray], np.ndarray]

DRIFT_SAMPLING = ("sample", "chirp")


@dataclass(frozen=True)
class Scene:
    """Per-pixel targets on an ``n x n`` aperture.

    ``targets`` maps ``(row, col)`` to a tuple of :class:`Target`; absent
    pixels see nothing. ``drift`` is an optional relative-path phase of
    absolute frame time. With ``drift_sampling="sample"`` it is evaluated at
    every sample; with ``"chirp"`` it is held at its value at the start of
    each chirp (quasi-static drift that only changes between slots).
    """

    n: int
    targets: Mapping[tuple[int, int], tuple[Target, ...]] = field(default_factory=dict)
    drift: Drift | None = None
    drift_sampling: str = "sample"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigurationError(f"scene size must be >= 1, got {self.n!r}")
        if self.drift_sampling not in DRIFT_SAMPLING:
            raise ConfigurationError(
                f"drift_sampling must be one of {DRIFT_SAMPLING}, got {self.drift_sampling!r}"
            )
        clean = {}
        for key, ts in self.targets.items():
            r, c = key
            if not (0 <= r < self.n and 0 <= c < self.n):
                raise ConfigurationError(f"target pixel {key} outside a {self.n}x{self.n} scene")
            ts = tuple(ts)
            for t in ts:
                if not isinstance(t, Target):
                    raise ConfigurationError(f"pixel {key}: expected Target, got {type(t).__name__}")
            if ts:
                clean[(int(r), int(c))] = ts
        object.__setattr__(self, "targets", clean)

    @classmethod
    def empty(cls, n: int, **kw) -> "Scene":
        return cls(n, {}, **kw)

    @classmethod
    def flat(cls, n: int, range: float, reflectivity: float = 1.0, phase: float = 0.0, **kw) -> "Scene":
        """Single surface at the same range in every pixel."""
        t = (Target(range, reflectivity, phase),)
        return cls(n, {(r, c): t for r in range_(n) for c in range_(n)}, **kw)

    @classmethod
    def staircase(cls, n: int, start: float, step: float, **kw) -> "Scene":
        """Range increases linearly with column index."""
        return cls(n, {(r, c): (Target(start + c * step),) for r in range_(n) for c in range_(n)}, **kw)

    def pixel(self, index) -> tuple[int, int]:
        """Normalise a ``(row, col)`` pair or a row-major flat index."""
        if isinstance(index, (tuple, list)):
            r, c = index
        else:
            r, c = divmod(int(index), self.n)
            if not 0 <= int(index) < self.n * self.n:
                raise IndexError(f"pixel {index} outside a {self.n}x{self.n} scene")
        if not (0 <= r < self.n and 0 <= c < self.n):
            raise IndexError(f"pixel {(r, c)} outside a {self.n}x{self.n} scene")
        return int(r), int(c)

    def targets_at(self, index) -> tuple[Target, ...]:
        return self.targets.get(self.pixel(index), ())

    def truth(self) -> np.ndarray:
        """``n x n`` array of the nearest target range per pixel (NaN when empty)."""
        out = np.full((self.n, self.n), np.nan)
        for (r, c), ts in self.targets.items():
            out[r, c] = min(t.range for t in ts)
        return out

    def max_range(self) -> float:
        return max((t.range for ts in self.targets.values() for t in ts), default=0.0)


range_ = range  # ``range`` is shadowed by keyword arguments above


def round_trip_delay(R: float) -> float:
    """Two-way propagation delay in seconds for a target at ``R`` metres."""
    R = np.asarray(R, dtype=float)
    if np.any(R < 0) or np.any(~np.isfinite(R)):
        raise ValueError(f"range must be finite and >= 0 m, got {R!r}")
    out = 2 * R / C
    return out if np.ndim(out) else float(out)


def beat_frequency(R: float, slope: float) -> float:
    """Dechirped beat frequency ``2*slope*R/c`` in Hz."""
    if not slope > 0:
        raise ValueError(f"chirp slope must be > 0, got {slope!r}")
    R = np.asarray(R, dtype=float)
    if np.any(R < 0):
        raise ValueError(f"range must be >= 0 m, got {R!r}")
    out = 2 * slope * R / C
    return out if np.ndim(out) else float(out)


def scene_response(pixel, scene: Scene) -> list[tuple[float, float, float]]:
    """``(delay, amplitude, static phase)`` per target at ``pixel``, in insertion order."""
    return [(round_trip_delay(t.range), t.reflectivity, t.phase) for t in scene.targets_at(pixel)]


def responses_from(targets: Sequence[Target]) -> list[tuple[float, float, float]]:
    return [(round_trip_delay(t.range), t.reflectivity, t.phase) for t in targets]
