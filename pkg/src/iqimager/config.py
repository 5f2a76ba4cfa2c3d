"""Experiment configuration: TOML text with flat sections.

Sections and keys (defaults in brackets)::

    [laser]    f0 [0.0]  bandwidth [600e9]  period [1e-3]
               direction ["up"]  linewidth [0.0]
    [hybrid]   phase_error [0.0]  amplitude_imbalance [0.0]  responsivity [1.0]
    [noise]    sigma [0.0]  snr_db [unset; overrides sigma]
    [array]    n [8]  readout ["row-column"]  leakage [0.0]
    [scene]    layout ["flat" | "empty" | "staircase" | "targets"]
               range [1.0]  reflectivity [1.0]  phase [0.0]  step [0.01]
               targets [[]]  (inline tables: {row, col, range, reflectivity, phase})
               drift ["none" | "constant" | "ramp" | "sinusoid" | "phase-noise"]
               drift_amplitude [0.0]  drift_frequency [0.0]  drift_rate [0.0]
               drift_offset [0.0]  drift_linewidth [0.0]  drift_sampling ["sample"]
    [sampling] fs ["auto"]  zero_pad [2]  window ["hann"]  snr_threshold_db [6.0]
               frames [1]  seed [0]
    [output]   dir ["out"]  spectra [false]  traces [false]

``fs = "auto"`` picks four times the largest beat frequency. ``snr_db`` is
the per-sample SNR of a unit-reflectivity target (see
:func:`iqimager.receiver.sigma_for_snr`). Unknown sections or keys are
rejected.
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .array import MODES, ArrayConfig
from .exceptions import ConfigurationError
from .laser import ChirpConfig
from .metrics import auto_sample_rate
from .receiver import HybridConfig, required_sample_rate, sigma_for_snr
from .scene import ConstantDrift, RampDrift, Scene, SinusoidDrift, Target, round_trip_delay

LAYOUTS = ("flat", "empty", "staircase", "targets")
DRIFTS = ("none", "constant", "ramp", "sinusoid", "phase-noise")

_NUM = (int, float)

SCHEMA: dict[str, dict[str, tuple[Any, Any]]] = {
    "laser": {
        "f0": (_NUM, 0.0),
        "bandwidth": (_NUM, 600e9),
        "period": (_NUM, 1e-3),
        "direction": (str, "up"),
        "linewidth": (_NUM, 0.0),
    },
    "hybrid": {
        "phase_error": (_NUM, 0.0),
        "amplitude_imbalance": (_NUM, 0.0),
        "responsivity": (_NUM, 1.0),
    },
    "noise": {
        "sigma": (_NUM, 0.0),
        "snr_db": (_NUM, None),
    },
    "array": {
        "n": (int, 8),
        "readout": (str, "row-column"),
        "leakage": (_NUM, 0.0),
    },
    "scene": {
        "layout": (str, "flat"),
        "range": (_NUM, 1.0),
        "reflectivity": (_NUM, 1.0),
        "phase": (_NUM, 0.0),
        "step": (_NUM, 0.01),
        "targets": (list, []),
        "drift": (str, "none"),
        "drift_amplitude": (_NUM, 0.0),
        "drift_frequency": (_NUM, 0.0),
        "drift_rate": (_NUM, 0.0),
        "drift_offset": (_NUM, 0.0),
        "drift_linewidth": (_NUM, 0.0),
        "drift_sampling": (str, "sample"),
    },
    "sampling": {
        "fs": ((int, float, str), "auto"),
        "zero_pad": (int, 2),
        "window": (str, "hann"),
        "snr_threshold_db": (_NUM, 6.0),
        "frames": (int, 1),
        "seed": (int, 0),
    },
    "output": {
        "dir": (str, "out"),
        "spectra": (bool, False),
        "traces": (bool, False),
    },
}

TARGET_KEYS = {"row", "col", "range", "reflectivity", "phase"}


class ConfigParseError(ConfigurationError):
    """Malformed config text; ``lineno`` is 1-based when known."""

    def __init__(self, msg: str, lineno: int | None = None):
        super().__init__(msg)
        self.lineno = lineno


@dataclass(frozen=True)
class ExperimentConfig:
    chirp: ChirpConfig
    linewidth: float
    hybrid: HybridConfig
    sigma: float
    array: ArrayConfig
    scene_spec: dict
    fs: float
    zero_pad: int
    window: str
    snr_threshold_db: float
    frames: int
    seed: int
    out_dir: str
    save_spectra: bool
    save_traces: bool
    values: dict = field(default_factory=dict, compare=False)

    def build_scene(self, seed: int = 0) -> Scene:
        """Scene for one frame; only a phase-noise drift depends on ``seed``."""
        return make_scene(self.scene_spec, self.array.n, self.chirp, self.fs, seed)

    def replace(self, **changes) -> "ExperimentConfig":
        """Re-validate with some ``section.key`` values changed, e.g. ``{"laser.bandwidth": 1e9}``."""
        values = {s: dict(v) for s, v in self.values.items()}
        for dotted, val in changes.items():
            sec, key = dotted.split(".")
            values[sec][key] = val
        return from_dict(values)


def _type_ok(value, types) -> bool:
    types = _as_tuple(types)
    if isinstance(value, bool):
        return bool in types
    return isinstance(value, types)


def _as_tuple(t):
    return t if isinstance(t, tuple) else (t,)


def _normalise(raw: dict) -> dict:
    values: dict[str, dict] = {}
    for sec in raw:
        if sec not in SCHEMA:
            raise ConfigurationError(f"unknown section [{sec}]; expected one of {list(SCHEMA)}")
        if not isinstance(raw[sec], dict):
            raise ConfigurationError(f"[{sec}] must be a table")
    for sec, keys in SCHEMA.items():
        given = raw.get(sec, {})
        for key in given:
            if key not in keys:
                raise ConfigurationError(f"unknown key {key!r} in [{sec}]")
        values[sec] = {}
        for key, (types, default) in keys.items():
            v = given.get(key, default)
            if v is not None and not _type_ok(v, types):
                raise ConfigurationError(
                    f"{sec}.{key}: expected {'/'.join(t.__name__ for t in _as_tuple(types))}, "
                    f"got {type(v).__name__} {v!r}"
                )
            if isinstance(v, float) and not math.isfinite(v):
                raise ConfigurationError(f"{sec}.{key}: must be finite, got {v!r}")
            if isinstance(v, int) and not isinstance(v, bool) and float in _as_tuple(types):
                v = float(v)
            values[sec][key] = v
    return values


def _field(where, fn):
    try:
        return fn()
    except ConfigurationError as e:
        raise ConfigurationError(f"{where}: {e}") from None


def _targets(spec: dict, n: int) -> dict:
    out: dict[tuple[int, int], list[Target]] = {}
    for k, t in enumerate(spec["targets"]):
        if not isinstance(t, dict):
            raise ConfigurationError(f"scene.targets[{k}]: expected an inline table")
        extra = set(t) - TARGET_KEYS
        if extra:
            raise ConfigurationError(f"scene.targets[{k}]: unknown key {sorted(extra)[0]!r}")
        for req in ("row", "col", "range"):
            if req not in t:
                raise ConfigurationError(f"scene.targets[{k}]: missing {req!r}")
        r, c = t["row"], t["col"]
        if not (isinstance(r, int) and isinstance(c, int) and 0 <= r < n and 0 <= c < n):
            raise ConfigurationError(f"scene.targets[{k}]: pixel ({r}, {c}) outside a {n}x{n} array")
        tgt = _field(f"scene.targets[{k}]", lambda: Target(
            float(t["range"]), float(t.get("reflectivity", 1.0)), float(t.get("phase", 0.0))))
        out.setdefault((r, c), []).append(tgt)
    return out


def make_scene(spec: dict, n: int, chirp: ChirpConfig, fs: float, seed: int = 0) -> Scene:
    kw = {"drift": make_drift(spec, n, chirp, fs, seed), "drift_sampling": spec["drift_sampling"]}
    layout = spec["layout"]
    if layout == "flat":
        scene = Scene.flat(n, spec["range"], spec["reflectivity"], spec["phase"], **kw)
    elif layout == "empty":
        scene = Scene.empty(n, **kw)
    elif layout == "staircase":
        scene = Scene.staircase(n, spec["range"], spec["step"], **kw)
    else:
        scene = Scene(n, {p: tuple(ts) for p, ts in _targets(spec, n).items()}, **kw)
    return scene


def make_drift(spec: dict, n: int, chirp: ChirpConfig, fs: float, seed: int):
    kind = spec["drift"]
    if kind == "none":
        return None
    if kind == "constant":
        return ConstantDrift(spec["drift_offset"])
    if kind == "ramp":
        return RampDrift(spec["drift_rate"], spec["drift_offset"])
    if kind == "sinusoid":
        return SinusoidDrift(spec["drift_amplitude"], spec["drift_frequency"], spec["drift_offset"])
    from . import rng
    from .laser import PhaseNoiseConfig, phase_noise_path
    from .scene import ReplayDrift

    frame_len = n * chirp.period
    m = int(math.ceil(frame_len * fs)) + 2
    pn = PhaseNoiseConfig(spec["drift_linewidth"], seed, 1 / fs)
    return ReplayDrift(phase_noise_path(m, pn, kind=rng.DRIFT))


def from_dict(raw: dict) -> ExperimentConfig:
    """Validate a parsed config mapping and fill defaults."""
    v = _normalise(raw)
    L, H, N, A, S, P, O = (v[k] for k in ("laser", "hybrid", "noise", "array", "scene", "sampling", "output"))

    chirp = _field("[laser]", lambda: ChirpConfig(L["f0"], L["bandwidth"], L["period"], L["direction"]))
    if L["linewidth"] < 0:
        raise ConfigurationError(f"laser.linewidth: must be >= 0 Hz, got {L['linewidth']!r}")
    hybrid = _field("[hybrid]", lambda: HybridConfig(H["phase_error"], H["amplitude_imbalance"], H["responsivity"]))
    if A["readout"] not in MODES:
        raise ConfigurationError(f"array.readout: must be one of {MODES}, got {A['readout']!r}")
    array = _field("[array]", lambda: ArrayConfig(A["n"], A["readout"], A["leakage"]))

    if N["snr_db"] is not None:
        sigma = sigma_for_snr(N["snr_db"], 1.0, 1.0, hybrid.responsivity)
    else:
        sigma = N["sigma"]
        if sigma < 0:
            raise ConfigurationError(f"noise.sigma: must be >= 0, got {sigma!r}")

    if S["layout"] not in LAYOUTS:
        raise ConfigurationError(f"scene.layout: must be one of {LAYOUTS}, got {S['layout']!r}")
    if S["drift"] not in DRIFTS:
        raise ConfigurationError(f"scene.drift: must be one of {DRIFTS}, got {S['drift']!r}")
    if S["drift_sampling"] not in ("sample", "chirp"):
        raise ConfigurationError(f"scene.drift_sampling: must be 'sample' or 'chirp', got {S['drift_sampling']!r}")
    if S["layout"] != "targets" and S["targets"]:
        raise ConfigurationError("scene.targets: only allowed with layout = \"targets\"")
    # validates ranges/pixels; fs does not matter for static drift
    probe = make_scene(S, array.n, chirp, 1.0, 0) if S["drift"] != "phase-noise" else make_scene(
        dict(S, drift="none"), array.n, chirp, 1.0, 0)
    max_range = probe.max_range()
    if max_range > 0:
        tau = round_trip_delay(max_range)
        if not tau < chirp.period:
            raise ConfigurationError(
                f"scene: farthest target at {max_range} m has a round trip longer than the chirp period"
            )
    need = required_sample_rate(chirp, round_trip_delay(max_range))
    fs = P["fs"]
    if isinstance(fs, str):
        if fs != "auto":
            raise ConfigurationError(f"sampling.fs: expected a number or \"auto\", got {fs!r}")
        fs = auto_sample_rate(chirp, max_range if max_range > 0 else 1.0)
    else:
        fs = float(fs)
        if not fs > need or not fs > 0:
            raise ConfigurationError(
                f"sampling.fs: {fs:.6g} Hz is below the minimum; fs must exceed {need:.6g} Hz "
                f"for a target at {max_range} m"
            )
    if int(round(chirp.period * fs)) < 8:
        raise ConfigurationError(f"sampling.fs: {fs} Hz gives fewer than 8 samples per chirp")
    if P["zero_pad"] < 1:
        raise ConfigurationError(f"sampling.zero_pad: must be >= 1, got {P['zero_pad']}")
    if P["window"] not in ("hann", "rect", "blackman"):
        raise ConfigurationError(f"sampling.window: must be hann, rect or blackman, got {P['window']!r}")
    if P["frames"] < 1:
        raise ConfigurationError(f"sampling.frames: must be >= 1, got {P['frames']}")
    if not 0 <= P["seed"] < 2**64:
        raise ConfigurationError(f"sampling.seed: must be an unsigned 64-bit integer, got {P['seed']}")

    return ExperimentConfig(
        chirp=chirp, linewidth=L["linewidth"], hybrid=hybrid, sigma=sigma, array=array,
        scene_spec=S, fs=fs, zero_pad=P["zero_pad"], window=P["window"],
        snr_threshold_db=P["snr_threshold_db"], frames=P["frames"], seed=P["seed"],
        out_dir=O["dir"], save_spectra=O["spectra"], save_traces=O["traces"], values=v,
    )


_LINE = re.compile(r"line (\d+)")


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate config text; see the module docstring for the schema."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ConfigParseError(f"config is not valid UTF-8: {e}") from None
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        m = _LINE.search(str(e))
        lineno = int(m.group(1)) if m else None
        where = f"line {lineno}: " if lineno else ""
        raise ConfigParseError(f"{where}{e}", lineno) from None
    return from_dict(raw)


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, list):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{ " + ", ".join(f"{k} = {_toml_value(x)}" for k, x in v.items()) + " }"
    raise TypeError(f"cannot write {type(v).__name__} to config")


def dump_config(cfg: ExperimentConfig) -> str:
    """Canonical config text with every default spelled out."""
    lines = []
    for sec in SCHEMA:
        lines.append(f"[{sec}]")
        for key, val in cfg.values[sec].items():
            if val is None:
                continue
            lines.append(f"{key} = {_toml_value(val)}")
        lines.append("")
    return "\n".join(lines)


def with_overrides(cfg: ExperimentConfig, seed: int | None = None, out: str | None = None) -> ExperimentConfig:
    changes = {}
    if seed is not None:
        changes["sampling.seed"] = int(seed)
    if out is not None:
        changes["output.dir"] = str(out)
    return cfg.replace(**changes) if changes else cfg

