import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from iqimager.dsp import DepthMap, RangeEstimate, beat_spectrum
from iqimager.io import (DMAP_HEADER, depth_map_bytes, depth_map_csv, fmt, read_depth_map_bin, read_traces,
                         spectrum_csv, write_depth_map_bin, write_traces)
from iqimager.traces import IqTrace


def test_fmt_round_trips():
    for x in (0.1, 1e-300, 123456789.123, -2.5):
        assert float(fmt(x)) == x
    assert fmt(float("nan")) == "nan" and fmt(float("-inf")) == "-inf"


def test_dmap_header_layout():
    assert DMAP_HEADER.size == 16
    b = depth_map_bytes(np.arange(4.0).reshape(2, 2))
    assert b[:4] == b"DMAP"
    assert struct.unpack("<III", b[4:16]) == (2, 0, 0)
    assert len(b) == 16 + 4 * 8
    assert np.frombuffer(b[16:], "<f8").tolist() == [0.0, 1.0, 2.0, 3.0]


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_dmap_round_trip(n, seed):
    import tempfile
    from pathlib import Path

    g = np.random.default_rng(seed)
    slope = 1e13
    f = g.uniform(1e3, 1e6, (n, n))
    bad = g.random((n, n)) < 0.2
    est = tuple(tuple(RangeEstimate(f[r, c], slope, 20.0, "no-peak" if bad[r, c] else "ok")
                      for c in range(n)) for r in range(n))
    dm = DepthMap(est)
    with tempfile.TemporaryDirectory() as d:
        p = Path(d) / "x.dmap"
        write_depth_map_bin(p, dm)
        back = read_depth_map_bin(p)
    want = dm.ranges(valid_only=True)
    assert np.array_equal(np.isnan(back), bad)
    assert np.array_equal(back[~bad], want[~bad])


def test_dmap_rejects_garbage(tmp_path):
    p = tmp_path / "x.dmap"
    p.write_bytes(b"DMA")
    with pytest.raises(ValueError):
        read_depth_map_bin(p)
    p.write_bytes(b"XXXX" + bytes(12))
    with pytest.raises(ValueError, match="magic"):
        read_depth_map_bin(p)
    p.write_bytes(depth_map_bytes(np.ones((2, 2)))[:-8])
    with pytest.raises(ValueError):
        read_depth_map_bin(p)
    with pytest.raises(ValueError):
        depth_map_bytes(np.ones((2, 3)))


def test_depth_map_csv():
    dm = DepthMap(((RangeEstimate(66712.8, 1e13, 30.0), RangeEstimate(0.0, 1e13, 1.0, "no-peak")),))
    lines = depth_map_csv(dm).splitlines()
    assert lines[0] == "row,col,range_m,beat_hz,snr_db,quality"
    assert lines[1].startswith("0,0,") and lines[1].endswith(",ok")
    assert lines[2].endswith(",no-peak")


def test_spectrum_csv_is_frequency_ordered():
    tr = IqTrace.from_complex(np.exp(2j * np.pi * 3 * np.arange(16) / 16), 16.0)
    rows = [r.split(",") for r in spectrum_csv(beat_spectrum(tr, 1)).splitlines()[1:]]
    f = [float(r[0]) for r in rows]
    assert f == sorted(f) and f[0] == -8.0 and len(f) == 16
    peak = max(rows, key=lambda r: float(r[1]))
    assert float(peak[0]) == 3.0 and float(peak[1]) == pytest.approx(0.0, abs=1e-9)


def test_trace_round_trip(tmp_path):
    g = np.random.default_rng(0)
    frame = {(r, c): IqTrace(g.normal(size=32), g.normal(size=32), 1e6, (r, c), r) for r in range(2) for c in range(2)}
    p = tmp_path / "f.iqtr"
    write_traces(p, frame, 2)
    assert p.stat().st_size == 24 + 4 * (16 + 2 * 32 * 8)
    n, back = read_traces(p)
    assert n == 2 and list(back) == list(frame)
    for k in frame:
        assert back[k].equals(frame[k]) and back[k].chirp == k[0]


def test_trace_write_and_read_errors(tmp_path):
    tr = IqTrace(np.ones(8), np.ones(8), 1.0)
    with pytest.raises(ValueError, match="missing"):
        write_traces(tmp_path / "a.iqtr", {(0, 0): tr}, 2)
    with pytest.raises(ValueError):
        write_traces(tmp_path / "a.iqtr", {(0, 0): tr, (0, 1): tr, (1, 0): tr,
                                           (1, 1): IqTrace(np.ones(9), np.ones(9), 1.0)}, 2)
    write_traces(tmp_path / "ok.iqtr", {(0, 0): tr}, 1)
    data = (tmp_path / "ok.iqtr").read_bytes()
    (tmp_path / "short.iqtr").write_bytes(data[:-1])
    with pytest.raises(ValueError, match="size"):
        read_traces(tmp_path / "short.iqtr")
    (tmp_path / "ver.iqtr").write_bytes(data[:4] + struct.pack("<I", 9) + data[8:])
    with pytest.raises(ValueError, match="version"):
        read_traces(tmp_path / "ver.iqtr")
