"""Beat-spectrum estimation, range recovery, depth maps and accuracy statistics.

Spectra use a forward scaling of ``1/n`` where ``n`` is the (zero-padded)
transform length, so ``sum(|x|**2)/n == sum(|X|**2)`` and an on-bin complex
tone of amplitude A with no padding or window lands in one bin of
magnitude A.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from scipy.signal import find_peaks, get_window

from .exceptions import FrameError, ReportError
from .scene import C, Scene
from .traces import IqTrace

WINDOWS = {"rect": "boxcar", "hann": "hann", "blackman": "blackman"}

OK = "ok"
NO_PEAK = "no-peak"
AMBIGUOUS = "ambiguous"

DEFAULT_SNR_THRESHOLD_DB = 6.0
# second peak this close to the strongest one (and separated from it by a real
# dip) makes the estimate ambiguous
AMBIGUITY_DB = 3.0
PEAK_PROMINENCE_DB = 3.0
# interpolation floor relative to the peak; keeps log() finite on exact nulls
_LOG_FLOOR = 1e-24


def window(trace: IqTrace, kind: str = "hann") -> IqTrace:
    """Taper the trace; the window's mean is kept as its coherent gain.

    Windows are periodic (DFT-even): hann is ``0.5*(1 - cos(2*pi*k/n))``.
    """
    if kind not in WINDOWS:
        raise ValueError(f"unknown window {kind!r}; choose from {sorted(WINDOWS)}")
    n = len(trace)
    if n == 0:
        raise ValueError("cannot window an empty trace")
    if kind == "rect":
        return IqTrace(trace.i, trace.q, trace.fs, trace.pixel, trace.chirp, "rect", 1.0)
    w = get_window(WINDOWS[kind], n)
    return IqTrace(trace.i * w, trace.q * w, trace.fs, trace.pixel, trace.chirp, kind, float(w.mean()))


def next_pow2(n: int) -> int:
    return 1 << max(int(n) - 1, 0).bit_length()


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Complex DFT of ``I + jQ`` in standard FFT bin order (negative half kept)."""

    bins: np.ndarray
    fs: float
    n_samples: int
    window: str = "rect"
    coherent_gain: float = 1.0

    @property
    def n(self) -> int:
        return len(self.bins)

    @property
    def resolution(self) -> float:
        """Bin spacing ``fs / n`` of the padded transform, Hz."""
        return self.fs / self.n

    @property
    def signal_resolution(self) -> float:
        """Natural resolution ``fs / n_samples`` (one over the record length), Hz."""
        return self.fs / self.n_samples

    def frequencies(self) -> np.ndarray:
        return np.fft.fftfreq(self.n, 1 / self.fs)

    def power(self) -> np.ndarray:
        b = self.bins
        return b.real**2 + b.imag**2

    def amplitude(self) -> np.ndarray:
        """Bin magnitudes rescaled to tone amplitude (undoes padding and window gain)."""
        return np.abs(self.bins) * self.n / (self.n_samples * self.coherent_gain)


def beat_spectrum(trace: IqTrace, zero_pad: int = 2) -> Spectrum:
    """FFT of ``I + jQ`` zero-padded to ``next_pow2(len) * zero_pad`` points."""
    n = len(trace)
    if n < 8:
        raise ValueError(f"need at least 8 samples, got {n}")
    if int(zero_pad) != zero_pad or zero_pad < 1:
        raise ValueError(f"zero_pad must be a positive integer, got {zero_pad!r}")
    nfft = next_pow2(n) * int(zero_pad)
    X = np.fft.fft(trace.z, nfft) / nfft
    return Spectrum(X, trace.fs, n, trace.window, trace.coherent_gain)


def parabolic_offset(a: float, b: float, c: float) -> float:
    """Vertex offset of the parabola through ``(-1, a), (0, b), (1, c)``."""
    den = a - 2 * b + c
    if den == 0:
        return 0.0
    return 0.5 * (a - c) / den


class BeatEstimate(NamedTuple):
    frequency: float
    snr_db: float
    quality: str
    offset: float = 0.0  # sub-bin correction in padded bins


def _db(x: float) -> float:
    if x == 0:
        return -math.inf
    if math.isinf(x):
        return math.inf
    return 10 * math.log10(x)


def estimate_beat_frequency(
    spec: Spectrum,
    snr_threshold_db: float = DEFAULT_SNR_THRESHOLD_DB,
    side: str = "positive",
) -> BeatEstimate:
    """Peak pick with three-point parabolic refinement on log power.

    The strongest bin ``k`` in the searched half and its neighbours give
    ``f = (k + delta) * df``. Peak SNR is the peak bin power over the median
    power of the searched half outside the main lobe. Quality is
    ``no-peak`` below ``snr_threshold_db``; ``ambiguous`` when a second,
    dip-separated peak comes within 3 dB of the strongest. Two tones closer
    than the main-lobe width merge into one peak and are reported as a single
    ``ok`` estimate lying between them.
    """
    p = spec.power()
    n = spec.n
    half = n // 2
    if side == "positive":
        idx = np.arange(0, half)
    elif side == "negative":
        idx = np.arange(half, n)
    else:
        raise ValueError(f"side must be 'positive' or 'negative', got {side!r}")
    seg = p[idx]
    j = int(np.argmax(seg))
    k = int(idx[j])
    peak = float(p[k])
    if not peak > 0:
        return BeatEstimate(0.0, -math.inf, NO_PEAK)

    floor = peak * _LOG_FLOOR
    a, b, c = (math.log(max(float(p[(k + d) % n]), floor)) for d in (-1, 0, 1))
    delta = parabolic_offset(a, b, c)
    delta = min(max(delta, -0.5), 0.5)
    kk = k if k < half else k - n
    f = (kk + delta) * spec.resolution

    pad = max(n // max(next_pow2(spec.n_samples), 1), 1)
    guard = 4 * pad
    mask = np.abs(np.arange(len(seg)) - j) > guard
    off = seg[mask]
    noise = float(np.median(off)) if off.size else 0.0
    snr_db = _db(peak / noise) if noise > 0 else math.inf

    if snr_db < snr_threshold_db:
        quality = NO_PEAK
    elif _has_rival(seg, j):
        quality = AMBIGUOUS
    else:
        quality = OK
    return BeatEstimate(float(f), float(snr_db), quality, float(delta))


def _has_rival(seg: np.ndarray, j: int) -> bool:
    peak = seg[j]
    db = 10 * np.log10(np.maximum(seg / peak, _LOG_FLOOR))
    pk, props = find_peaks(db, height=-AMBIGUITY_DB, prominence=PEAK_PROMINENCE_DB)
    return bool(np.sum(pk != j) > 0)


def detect_peaks(spec: Spectrum, within_db: float = 6.0,
                 prominence_db: float = PEAK_PROMINENCE_DB) -> np.ndarray:
    """Frequencies of distinct positive-frequency peaks near the strongest one.

    A peak counts when it is within ``within_db`` of the maximum and stands
    at least ``prominence_db`` above the dip separating it from its neighbour.
    """
    p = spec.power()[: spec.n // 2]
    top = p.max()
    if not top > 0:
        return np.empty(0)
    db = 10 * np.log10(np.maximum(p / top, _LOG_FLOOR))
    pk, _ = find_peaks(np.concatenate(([-np.inf], db, [-np.inf])),
                       height=-within_db, prominence=prominence_db)
    return (pk - 1) * spec.resolution


def range_from_beat(f_b, slope: float):
    """Target range ``c * f_b / (2 * slope)`` in metres."""
    if not slope > 0:
        raise ValueError(f"chirp slope must be > 0, got {slope!r}")
    out = C * np.asarray(f_b, dtype=float) / (2 * slope)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class RangeEstimate:
    beat_frequency: float
    slope: float
    snr_db: float
    quality: str = OK

    @property
    def range(self) -> float:
        return C * self.beat_frequency / (2 * self.slope)

    @property
    def ok(self) -> bool:
        return self.quality == OK


def estimate_range(trace: IqTrace, slope: float, window_kind: str = "hann", zero_pad: int = 2,
                   snr_threshold_db: float = DEFAULT_SNR_THRESHOLD_DB) -> RangeEstimate:
    """window -> beat_spectrum -> estimate_beat_frequency -> range, for one trace."""
    spec = beat_spectrum(window(trace, window_kind), zero_pad)
    est = estimate_beat_frequency(spec, snr_threshold_db)
    return RangeEstimate(est.frequency, slope, est.snr_db, est.quality)


@dataclass(frozen=True, eq=False)
class DepthMap:
    """``n x n`` grid of range estimates plus the settings that produced it."""

    estimates: tuple[tuple[RangeEstimate, ...], ...]
    metadata: Mapping = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.estimates)

    def _grid(self, attr) -> np.ndarray:
        return np.array([[getattr(e, attr) for e in row] for row in self.estimates], dtype=float)

    def ranges(self, valid_only: bool = False) -> np.ndarray:
        r = self._grid("range")
        if valid_only:
            r[~self.valid()] = np.nan
        return r

    def beat_frequencies(self) -> np.ndarray:
        return self._grid("beat_frequency")

    def snr_db(self) -> np.ndarray:
        return self._grid("snr_db")

    def quality(self) -> np.ndarray:
        return np.array([[e.quality for e in row] for row in self.estimates], dtype=object)

    def valid(self) -> np.ndarray:
        return self.quality() == OK


def build_depth_map(
    frame: Mapping[tuple[int, int], IqTrace],
    n: int,
    slope: float,
    *,
    window_kind: str = "hann",
    zero_pad: int = 2,
    snr_threshold_db: float = DEFAULT_SNR_THRESHOLD_DB,
    metadata: Mapping | None = None,
    workers: int = 1,
) -> DepthMap:
    """Estimate range in every pixel of a complete frame.

    ``frame`` maps ``(row, col)`` to that pixel's trace. Pixels are processed
    independently; ``workers`` only changes wall time, never the result.
    """
    missing = [(r, c) for r in range(n) for c in range(n) if (r, c) not in frame]
    if missing:
        raise FrameError(f"frame is missing {len(missing)} of {n * n} pixels, e.g. {missing[0]}")
    keys = [(r, c) for r in range(n) for c in range(n)]

    def one(key):
        return estimate_range(frame[key], slope, window_kind, zero_pad, snr_threshold_db)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(one, keys))
    else:
        flat = [one(k) for k in keys]
    grid = tuple(tuple(flat[r * n:(r + 1) * n]) for r in range(n))
    return DepthMap(grid, dict(metadata or {}))


@dataclass(frozen=True, eq=False)
class AccuracyReport:
    """Per-pixel statistics of repeated range measurements.

    ``sigma`` uses the unbiased (n-1) estimator; ``ratio`` is ``sigma/R``,
    the resolution-over-range figure of merit.
    """

    truth: np.ndarray
    mean_range: np.ndarray
    mean_error: np.ndarray
    sigma: np.ndarray
    ratio: np.ndarray
    frames: int
    bandwidth: float | None
    valid_counts: np.ndarray

    @property
    def resolution(self) -> float | None:
        return None if self.bandwidth is None else C / (2 * self.bandwidth)

    def summary(self) -> dict:
        def agg(a):
            a = a[np.isfinite(a)]
            return float(np.mean(a)) if a.size else math.nan

        return {
            "frames": self.frames,
            "bandwidth_hz": self.bandwidth,
            "resolution_m": self.resolution,
            "mean_error_m": agg(self.mean_error),
            "sigma_m": agg(self.sigma),
            "sigma_over_range": agg(self.ratio),
        }


def accuracy_report(maps: Sequence[DepthMap], truth, bandwidth: float | None = None) -> AccuracyReport:
    """Mean error, spread and spread-over-range per pixel across repeated frames.

    ``truth`` is a :class:`Scene` (nearest target per pixel) or an ``n x n``
    array of true ranges. Pixels flagged in any frame drop that frame; pixels
    with fewer than two usable frames report NaN.
    """
    maps = list(maps)
    if len(maps) < 2:
        raise ReportError(f"need at least 2 repeated frames, got {len(maps)}")
    n = maps[0].n
    if any(m.n != n for m in maps):
        raise ReportError("depth maps have different sizes")
    R = truth.truth() if isinstance(truth, Scene) else np.asarray(truth, dtype=float)
    if R.shape != (n, n):
        raise ReportError(f"truth is {R.shape}, depth maps are {(n, n)}")
    if bandwidth is None:
        bandwidth = maps[0].metadata.get("bandwidth")

    stack = np.stack([m.ranges(valid_only=True) for m in maps])
    counts = np.sum(np.isfinite(stack), axis=0)
    mean = np.full((n, n), np.nan)
    sigma = np.full((n, n), np.nan)
    ok = counts >= 2
    if np.any(ok):
        s = stack[:, ok]
        mean[ok] = np.nanmean(s, axis=0)
        sigma[ok] = np.nanstd(s, axis=0, ddof=1)
    err = mean - R
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = sigma / R
    return AccuracyReport(R, mean, err, sigma, ratio, len(maps), bandwidth, counts)
