"""On-disk formats: depth maps, spectra, IQ trace files and manifests.

Binary layouts are little-endian.

Depth map (``.dmap``), 16-byte header then ``N*N`` float64 ranges in
row-major order, NaN where no valid peak was found::

    b"DMAP" | u32 N | u32 reserved (0) | u32 reserved (0)

IQ traces (``.iqtr``), 24-byte header then one record per pixel in
row-major order::

    b"IQTR" | u32 version (1) | u32 N | u32 n_samples | f64 fs
    record: u32 row | u32 col | u32 chirp | u32 reserved | f64[n] I | f64[n] Q
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import math
import struct
from pathlib import Path
from typing import Mapping

import numpy as np

from .dsp import DepthMap, Spectrum
from .traces import IqTrace

DMAP_MAGIC = b"DMAP"
DMAP_HEADER = struct.Struct("<4sIII")
IQTR_MAGIC = b"IQTR"
IQTR_VERSION = 1
IQTR_HEADER = struct.Struct("<4sIIId")
IQTR_RECORD = struct.Struct("<IIII")


def fmt(x) -> str:
    """Shortest round-tripping text for a float; stable across runs."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def depth_map_csv(dmap: DepthMap) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row", "col", "range_m", "beat_hz", "snr_db", "quality"])
    for r, row in enumerate(dmap.estimates):
        for c, e in enumerate(row):
            w.writerow([r, c, fmt(e.range), fmt(e.beat_frequency), fmt(e.snr_db), e.quality])
    return buf.getvalue()


def write_depth_map_csv(path, dmap: DepthMap):
    _write_text(Path(path), depth_map_csv(dmap))


def depth_map_bytes(ranges: np.ndarray) -> bytes:
    ranges = np.asarray(ranges, dtype="<f8")
    n = ranges.shape[0]
    if ranges.shape != (n, n):
        raise ValueError(f"depth map must be square, got {ranges.shape}")
    return DMAP_HEADER.pack(DMAP_MAGIC, n, 0, 0) + ranges.tobytes(order="C")


def write_depth_map_bin(path, dmap: DepthMap):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(depth_map_bytes(dmap.ranges(valid_only=True)))


def read_depth_map_bin(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < DMAP_HEADER.size:
        raise ValueError(f"{path}: too short for a depth-map header")
    magic, n, _, _ = DMAP_HEADER.unpack_from(data)
    if magic != DMAP_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    body = data[DMAP_HEADER.size:]
    if len(body) != 8 * n * n:
        raise ValueError(f"{path}: expected {n * n} values, found {len(body) // 8}")
    return np.frombuffer(body, dtype="<f8").reshape(n, n).copy()


def spectrum_csv(spec: Spectrum) -> str:
    """Frequency-ordered (negative to positive) magnitude in dB and phase."""
    X = np.fft.fftshift(spec.bins)
    f = np.fft.fftshift(spec.frequencies())
    mag = np.abs(X)
    with np.errstate(divide="ignore"):
        db = 20 * np.log10(mag)
    ph = np.angle(X)
    buf = _io.StringIO()
    buf.write("frequency_hz,magnitude_db,phase_rad\n")
    for a, b, c in zip(f, db, ph):
        buf.write(f"{fmt(a)},{fmt(b)},{fmt(c)}\n")
    return buf.getvalue()


def write_spectrum_csv(path, spec: Spectrum):
    _write_text(Path(path), spectrum_csv(spec))


def write_traces(path, frame: Mapping[tuple[int, int], IqTrace], n: int):
    """Write a complete frame, row-major, to an ``.iqtr`` file."""
    keys = [(r, c) for r in range(n) for c in range(n)]
    missing = [k for k in keys if k not in frame]
    if missing:
        raise ValueError(f"frame is missing pixels, e.g. {missing[0]}")
    first = frame[keys[0]]
    ns, fs = len(first), first.fs
    parts = [IQTR_HEADER.pack(IQTR_MAGIC, IQTR_VERSION, n, ns, fs)]
    for k in keys:
        tr = frame[k]
        if len(tr) != ns or tr.fs != fs:
            raise ValueError(f"pixel {k}: length/sample rate differ from pixel (0, 0)")
        parts.append(IQTR_RECORD.pack(k[0], k[1], tr.chirp, 0))
        parts.append(np.asarray(tr.i, dtype="<f8").tobytes())
        parts.append(np.asarray(tr.q, dtype="<f8").tobytes())
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(b"".join(parts))


def read_traces(path) -> tuple[int, dict[tuple[int, int], IqTrace]]:
    data = Path(path).read_bytes()
    if len(data) < IQTR_HEADER.size:
        raise ValueError(f"{path}: too short for a trace header")
    magic, version, n, ns, fs = IQTR_HEADER.unpack_from(data)
    if magic != IQTR_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != IQTR_VERSION:
        raise ValueError(f"{path}: unsupported trace format version {version}")
    rec = IQTR_RECORD.size + 16 * ns
    if len(data) != IQTR_HEADER.size + n * n * rec:
        raise ValueError(f"{path}: size does not match {n}x{n} records of {ns} samples")
    frame = {}
    off = IQTR_HEADER.size
    for _ in range(n * n):
        r, c, chirp, _ = IQTR_RECORD.unpack_from(data, off)
        off += IQTR_RECORD.size
        i = np.frombuffer(data, dtype="<f8", count=ns, offset=off)
        off += 8 * ns
        q = np.frombuffer(data, dtype="<f8", count=ns, offset=off)
        off += 8 * ns
        frame[(r, c)] = IqTrace(i.copy(), q.copy(), fs, (r, c), chirp)
    return n, frame


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_json(path, obj):
    _write_text(Path(path), json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n")
