"""Experiment orchestration: simulate frames, sweep parameters, re-analyse traces.

Every output file is a pure function of the config and master seed; worker
counts change wall time only, and nothing time- or host-dependent is written.
"""

from __future__ import annotations

import csv
import io as _io
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, rng
from .array import DIRECT, ROW_COLUMN, build_readout_schedule, interconnect_count, readout_frame
from .config import ExperimentConfig, dump_config, parse_config
from .dsp import DepthMap, accuracy_report, beat_spectrum, build_depth_map, window
from .io import (fmt, read_traces, sha256, write_depth_map_bin, write_depth_map_csv, write_json,
                 write_spectrum_csv, write_traces)
from .laser import PhaseNoiseConfig
from .metrics import auto_sample_rate, measure_irr, rayleigh_resolution, resolution_check, theoretical_resolution
from .receiver import NoiseConfig

SWEEP_PARAMETERS = {
    "B": "laser.bandwidth",
    "snr": "noise.snr_db",
    "N": "array.n",
    "leakage": "array.leakage",
    "linewidth": "laser.linewidth",
}


class UsageError(ValueError):
    """Bad command-line usage (unknown sweep parameter, empty value list, ...)."""


def frame_seed(cfg: ExperimentConfig, index: int) -> int:
    return rng.derive_seed(cfg.seed, index)


def simulate_frame(cfg: ExperimentConfig, index: int = 0, workers: int = 1):
    """One frame of traces and its depth map; returns ``(traces, depth_map, seed)``."""
    seed = frame_seed(cfg, index)
    scene = cfg.build_scene(seed)
    schedule = build_readout_schedule(cfg.array)
    pn = PhaseNoiseConfig(cfg.linewidth, seed, 1 / cfg.fs)
    traces = readout_frame(scene, schedule, cfg.chirp, cfg.hybrid, NoiseConfig(cfg.sigma, seed), cfg.fs,
                           phase_noise=pn, workers=workers)
    dmap = build_depth_map(traces, cfg.array.n, cfg.chirp.slope, window_kind=cfg.window,
                           zero_pad=cfg.zero_pad, snr_threshold_db=cfg.snr_threshold_db,
                           metadata=_map_metadata(cfg, index, seed), workers=workers)
    return traces, dmap, seed


def _map_metadata(cfg: ExperimentConfig, index: int, seed: int) -> dict:
    return {"frame": index, "seed": seed, "bandwidth": cfg.chirp.bandwidth, "slope": cfg.chirp.slope,
            "fs": cfg.fs, "n": cfg.array.n, "readout": cfg.array.readout_mode}


def simulate_maps(cfg: ExperimentConfig, frames: int | None = None, workers: int = 1) -> list[DepthMap]:
    frames = cfg.frames if frames is None else frames
    return [simulate_frame(cfg, f, workers)[1] for f in range(frames)]


def _prepare(out) -> Path:
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as e:
        raise OSError(f"output directory {out} is not writable: {e.strerror or e}") from e
    return out


def _manifest(out: Path, cfg: ExperimentConfig, kind: str, seeds: Sequence[int], extra: dict | None = None):
    files = sorted(p for p in out.rglob("*") if p.is_file() and p.name != "manifest.json")
    # where the tree was written is not part of what it contains
    portable = cfg.replace(**{"output.dir": "."})
    doc = {
        "tool": "iqimager",
        "version": __version__,
        "command": kind,
        "config": portable.values,
        "config_toml": dump_config(portable),
        "seeds": {"master": cfg.seed, "frames": list(seeds)},
        "artifacts": {p.relative_to(out).as_posix(): sha256(p) for p in files},
    }
    if extra:
        doc.update(extra)
    write_json(out / "manifest.json", doc)


def _accuracy_csv(report) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row", "col", "truth_m", "mean_range_m", "mean_error_m", "sigma_m", "sigma_over_range",
                "valid_frames"])
    n = report.truth.shape[0]
    for r in range(n):
        for c in range(n):
            w.writerow([r, c, fmt(report.truth[r, c]), fmt(report.mean_range[r, c]), fmt(report.mean_error[r, c]),
                        fmt(report.sigma[r, c]), fmt(report.ratio[r, c]), int(report.valid_counts[r, c])])
    return buf.getvalue()


def run_simulate(cfg: ExperimentConfig, out=None, workers: int = 1) -> Path:
    """Simulate ``cfg.frames`` frames and write depth maps, report and manifest.

    Layout of the output directory::

        depth_map.csv, depth_map.dmap   first frame
        frames/frame_NNNN.dmap          every frame (when frames > 1)
        accuracy.csv, report.json       per-pixel statistics (report.json always)
        spectra/pixel_R_C.csv           first frame, when output.spectra
        traces/frame_NNNN.iqtr          when output.traces
        manifest.json                   config, seeds, version, artifact hashes
    """
    out = _prepare(out if out is not None else cfg.out_dir)
    maps, seeds = [], []
    for f in range(cfg.frames):
        traces, dmap, seed = simulate_frame(cfg, f, workers)
        seeds.append(seed)
        maps.append(dmap)
        if f == 0:
            write_depth_map_csv(out / "depth_map.csv", dmap)
            write_depth_map_bin(out / "depth_map.dmap", dmap)
            if cfg.save_spectra:
                for (r, c), tr in traces.items():
                    spec = beat_spectrum(window(tr, cfg.window), cfg.zero_pad)
                    write_spectrum_csv(out / "spectra" / f"pixel_{r}_{c}.csv", spec)
        if cfg.frames > 1:
            write_depth_map_bin(out / "frames" / f"frame_{f:04d}.dmap", dmap)
        if cfg.save_traces:
            write_traces(out / "traces" / f"frame_{f:04d}.iqtr", traces, cfg.array.n)
        del traces

    scene = cfg.build_scene(seeds[0])
    report_doc = {
        "frames": cfg.frames,
        "valid_fraction": float(np.mean(maps[0].valid())),
        "interconnects": cfg.array.interconnects,
        "resolution_m": theoretical_resolution(cfg.chirp.bandwidth),
    }
    if cfg.frames >= 2:
        rep = accuracy_report(maps, scene, cfg.chirp.bandwidth)
        (out / "accuracy.csv").write_text(_accuracy_csv(rep), encoding="utf-8")
        report_doc.update(rep.summary())
    else:
        r = maps[0].ranges(valid_only=True)
        err = r - scene.truth()
        report_doc["mean_error_m"] = _finite_mean(err)
    write_json(out / "report.json", report_doc)
    _manifest(out, cfg, "simulate", seeds)
    return out


def _finite_mean(a) -> float:
    a = np.asarray(a, dtype=float)
    a = a[np.isfinite(a)]
    return float(a.mean()) if a.size else math.nan


def _reference_range(cfg: ExperimentConfig) -> float:
    truth = cfg.build_scene(0).truth()
    fin = truth[np.isfinite(truth)]
    return float(fin.min()) if fin.size else 1.0


def sweep_row(cfg: ExperimentConfig, parameter: str, value, workers: int = 1) -> dict:
    """Metrics for a single sweep point (see :func:`run_sweep` for columns)."""
    c = cfg.replace(**{SWEEP_PARAMETERS[parameter]: value})
    maps = simulate_maps(c, max(c.frames, 2), workers)
    rep = accuracy_report(maps, c.build_scene(0), c.chirp.bandwidth)
    s = rep.summary()
    R0 = _reference_range(c)
    d = theoretical_resolution(c.chirp.bandwidth)
    fs_res = auto_sample_rate(c.chirp, R0 + 3 * d)
    return {
        "parameter": parameter,
        "value": value,
        "sigma_m": s["sigma_m"],
        "sigma_over_range": s["sigma_over_range"],
        "mean_error_m": s["mean_error_m"],
        "resolution_theory_m": d,
        "resolution_measured_m": rayleigh_resolution(c.chirp, R0),
        "resolution_check": "pass" if resolution_check(c.chirp, fs_res, R0) else "fail",
        "irr_db": measure_irr(c.chirp, c.hybrid, R0),
        "interconnects_row_column": interconnect_count(c.array.n, ROW_COLUMN),
        "interconnects_direct": interconnect_count(c.array.n, DIRECT),
        "valid_fraction": float(np.mean(np.isfinite(np.stack([m.ranges(True) for m in maps])))),
    }


SWEEP_COLUMNS = ["parameter", "value", "sigma_m", "sigma_over_range", "mean_error_m", "resolution_theory_m",
                 "resolution_measured_m", "resolution_check", "irr_db", "interconnects_row_column",
                 "interconnects_direct", "valid_fraction"]


def parse_values(parameter: str, values) -> list:
    if parameter not in SWEEP_PARAMETERS:
        raise UsageError(f"unknown sweep parameter {parameter!r}; choose from {sorted(SWEEP_PARAMETERS)}")
    if isinstance(values, str):
        values = [v for v in values.replace(",", " ").split() if v]
    values = list(values)
    if not values:
        raise UsageError("sweep needs at least one value")
    out = []
    for v in values:
        try:
            out.append(int(v) if parameter == "N" else float(v))
        except (TypeError, ValueError):
            raise UsageError(f"sweep value {v!r} is not a number") from None
    return out


def run_sweep(cfg: ExperimentConfig, parameter: str, values, out=None, workers: int = 1) -> Path:
    """Write ``sweep.csv`` (one row per value) and a manifest."""
    vals = parse_values(parameter, values)
    out = _prepare(out if out is not None else cfg.out_dir)
    rows = [sweep_row(cfg, parameter, v, workers) for v in vals]
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([fmt(r[k]) if isinstance(r[k], float) else r[k] for k in SWEEP_COLUMNS])
    (out / "sweep.csv").write_text(buf.getvalue(), encoding="utf-8")
    _manifest(out, cfg, "sweep", [], {"sweep": {"parameter": parameter, "values": vals}})
    return out


def run_analyze(traces_path, cfg: ExperimentConfig, out=None, workers: int = 1) -> Path:
    """Recompute the depth map from a stored ``.iqtr`` frame."""
    n, frame = read_traces(traces_path)
    if n != cfg.array.n:
        raise ValueError(f"{traces_path} holds a {n}x{n} frame but the config is {cfg.array.n}x{cfg.array.n}")
    out = _prepare(out if out is not None else cfg.out_dir)
    dmap = build_depth_map(frame, n, cfg.chirp.slope, window_kind=cfg.window, zero_pad=cfg.zero_pad,
                           snr_threshold_db=cfg.snr_threshold_db, workers=workers)
    write_depth_map_csv(out / "depth_map.csv", dmap)
    write_depth_map_bin(out / "depth_map.dmap", dmap)
    _manifest(out, cfg, "analyze", [], {"input": {"traces": Path(traces_path).name, "sha256": sha256(traces_path)}})
    return out


RECIPES: dict[str, tuple[str, str]] = {
    "flat_8x8_1m": (
        "8x8 row-column array, 600 GHz / 1 ms chirp, flat target at 1 m, 10 noisy frames",
        """\
[laser]
bandwidth = 600e9
period = 1e-3
linewidth = 100e3

[noise]
snr_db = -10.0

[array]
n = 8
readout = "row-column"

[scene]
layout = "flat"
range = 1.0

[sampling]
frames = 10
seed = 2021
""",
    ),
    "resolution_250um": (
        "single pixel, two equal targets 250 um apart at 1 m (600 GHz sweep)",
        """\
[laser]
bandwidth = 600e9
period = 1e-3

[array]
n = 1

[scene]
layout = "targets"
targets = [{ row = 0, col = 0, range = 1.0 }, { row = 0, col = 0, range = 1.00025 }]

[sampling]
zero_pad = 8
""",
    ),
    "drift_immunity_8x8": (
        "8x8 flat 1 m scene with a +/-pi sinusoidal relative-path drift across the frame",
        """\
[laser]
bandwidth = 600e9
period = 1e-3

[array]
n = 8

[scene]
layout = "flat"
range = 1.0
drift = "sinusoid"
drift_amplitude = 3.141592653589793
drift_frequency = 125.0
drift_sampling = "chirp"
""",
    ),
    "hybrid_phase_error": (
        "1x1 array through a hybrid with 0.1 rad quadrature error (image rejection ~26 dB)",
        """\
[laser]
bandwidth = 10e9
period = 1e-3

[hybrid]
phase_error = 0.1

[array]
n = 1

[scene]
layout = "flat"
range = 1.0
""",
    ),
}


def recipe(name: str) -> ExperimentConfig:
    if name not in RECIPES:
        raise UsageError(f"unknown recipe {name!r}; choose from {sorted(RECIPES)}")
    return parse_config(RECIPES[name][1])
