"""N x N aperture with row-column addressing and time-multiplexed readout.

In row-column mode one row is switched on per time slot and all N column
lines are read in parallel for one full chirp, so the array needs N row
selects plus N column outputs. Direct mode wires every pixel out and reads
the whole aperture in a single chirp.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng
from .exceptions import ConfigurationError
from .laser import ChirpConfig, PhaseNoiseConfig, phase_noise_path
from .receiver import IDEAL, HybridConfig, NoiseConfig, add_noise, check_sampling, detect, sample_times, signal_field
from .scene import Scene, responses_from
from .traces import IqTrace

ROW_COLUMN = "row-column"
DIRECT = "direct"
MODES = (ROW_COLUMN, DIRECT)


def interconnect_count(n: int, mode: str = ROW_COLUMN) -> int:
    """Electrical lines needed to read an ``n x n`` array: ``2n`` or ``n**2``.

    Row-column uses fewer lines than direct wiring from ``n = 3`` on; at
    ``n = 2`` they tie and at ``n = 1`` direct wiring wins.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"array size must be >= 1, got {n!r}")
    n = int(n)
    if mode == ROW_COLUMN:
        return 2 * n
    if mode == DIRECT:
        return n * n
    raise ValueError(f"unknown readout mode {mode!r}; choose from {MODES}")


@dataclass(frozen=True)
class ArrayConfig:
    n: int = 8
    readout_mode: str = ROW_COLUMN
    leakage: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigurationError(f"array size n must be >= 1, got {self.n!r}")
        if self.readout_mode not in MODES:
            raise ConfigurationError(f"readout_mode must be one of {MODES}, got {self.readout_mode!r}")
        if not (math.isfinite(self.leakage) and 0 <= self.leakage < 1):
            raise ConfigurationError(f"leakage must be in [0, 1), got {self.leakage!r}")

    @property
    def slots_per_frame(self) -> int:
        return self.n if self.readout_mode == ROW_COLUMN else 1

    @property
    def interconnects(self) -> int:
        return interconnect_count(self.n, self.readout_mode)


@dataclass(frozen=True)
class Slot:
    index: int
    rows: tuple[int, ...]
    columns: tuple[int, ...]
    chirp: int

    @property
    def row(self) -> int:
        if len(self.rows) != 1:
            raise AttributeError("slot activates more than one row")
        return self.rows[0]

    def pixels(self):
        return [(r, c) for r in self.rows for c in self.columns]


@dataclass(frozen=True)
class ReadoutSchedule:
    config: ArrayConfig
    slots: tuple[Slot, ...]

    def __len__(self) -> int:
        return len(self.slots)

    def frame_duration(self, chirp: ChirpConfig) -> float:
        return len(self.slots) * chirp.period

    def pixel_slots(self) -> dict[tuple[int, int], Slot]:
        return {p: s for s in self.slots for p in s.pixels()}


def build_readout_schedule(cfg: ArrayConfig) -> ReadoutSchedule:
    """Row-major schedule: slot ``r`` activates row ``r`` during chirp ``r``."""
    cols = tuple(range(cfg.n))
    if cfg.readout_mode == ROW_COLUMN:
        slots = tuple(Slot(r, (r,), cols, r) for r in range(cfg.n))
    else:
        slots = (Slot(0, tuple(range(cfg.n)), cols, 0),)
    return ReadoutSchedule(cfg, slots)


def _noise_stream(noise: NoiseConfig, n: int, pixel):
    if noise.sigma == 0:
        return None
    return rng.stream(noise.seed, rng.stream_id(rng.PIXEL_NOISE, pixel[0] * n + pixel[1]))


def readout_frame(
    scene: Scene,
    schedule: ReadoutSchedule,
    chirp: ChirpConfig,
    hybrid: HybridConfig = IDEAL,
    noise: NoiseConfig = NoiseConfig(),
    fs: float = 1e6,
    *,
    phase_noise: PhaseNoiseConfig | None = None,
    lo_amplitude: float = 1.0,
    workers: int = 1,
) -> dict[tuple[int, int], IqTrace]:
    """Simulate one frame; returns pixel -> trace in row-major order.

    Each slot is one chirp starting at ``chirp_index * T`` in frame time, so
    drift keeps evolving from slot to slot. Additive noise is keyed by pixel
    and laser phase noise by chirp index, which makes a leakage-free
    row-column frame sample-for-sample equal to a direct frame whenever the
    two assign the same chirps. With leakage ``L``, a read column also picks
    up ``L`` times the photocurrents of the same column's unselected rows.
    """
    cfg = schedule.config
    n = cfg.n
    if scene.n != n:
        raise ConfigurationError(f"scene is {scene.n}x{scene.n} but the array is {n}x{n}")
    for ts in scene.targets.values():
        for tau, _, _ in responses_from(ts):
            check_sampling(chirp, tau, fs)
    t = sample_times(chirp, fs)
    tau_max = max((tau for ts in scene.targets.values() for tau, _, _ in responses_from(ts)), default=0.0)
    lead = int(math.ceil(tau_max * fs)) + 1

    def noise_path(k):
        if phase_noise is None or phase_noise.linewidth == 0:
            return None
        pn = PhaseNoiseConfig(phase_noise.linewidth, phase_noise.seed, 1 / fs)
        return phase_noise_path(len(t) + lead, pn, stream=k, t0=-lead / fs)

    def clean(pixel, k, path):
        resp = responses_from(scene.targets.get(pixel, ()))
        if not resp:
            return np.zeros(len(t)), np.zeros(len(t))
        E = signal_field(chirp, resp, t, drift=scene.drift, drift_sampling=scene.drift_sampling,
                         t_start=k * chirp.period, noise_path=path)
        return detect(E, hybrid, lo_amplitude)

    leaky = cfg.readout_mode == ROW_COLUMN and cfg.leakage > 0

    def run_slot(slot: Slot):
        k = slot.chirp
        path = noise_path(k)
        out = []
        if leaky:
            sig = {(r, c): clean((r, c), k, path) for r in range(n) for c in slot.columns}
        for r in slot.rows:
            for c in slot.columns:
                if leaky:
                    i, q = sig[(r, c)]
                    li = np.zeros(len(t))
                    lq = np.zeros(len(t))
                    for r2 in range(n):
                        if r2 not in slot.rows:
                            li = li + sig[(r2, c)][0]
                            lq = lq + sig[(r2, c)][1]
                    i = i + cfg.leakage * li
                    q = q + cfg.leakage * lq
                else:
                    i, q = clean((r, c), k, path)
                i, q = add_noise(i, q, noise.sigma, _noise_stream(noise, n, (r, c)))
                out.append(IqTrace(i, q, fs, (r, c), k))
        return out

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_slot, schedule.slots))
    else:
        results = [run_slot(s) for s in schedule.slots]
    frame = {tr.pixel: tr for slot_traces in results for tr in slot_traces}
    return {(r, c): frame[(r, c)] for r in range(n) for c in range(n)}
