import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from iqimager.config import ConfigParseError, dump_config, from_dict, parse_config, with_overrides
from iqimager.exceptions import ConfigurationError
from iqimager.receiver import required_sample_rate
from iqimager.scene import SinusoidDrift, round_trip_delay


def test_defaults():
    cfg = parse_config("")
    assert cfg.chirp.bandwidth == 600e9 and cfg.chirp.period == 1e-3
    assert cfg.array.n == 8 and cfg.array.readout_mode == "row-column"
    assert cfg.sigma == 0.0 and cfg.frames == 1 and cfg.seed == 0
    assert cfg.fs > required_sample_rate(cfg.chirp, round_trip_delay(1.0))
    sc = cfg.build_scene()
    assert sc.n == 8 and sc.truth()[0, 0] == 1.0


def test_full_config():
    text = """
[laser]
bandwidth = 100e9
linewidth = 1e5

[noise]
snr_db = 0

[array]
n = 2
readout = "direct"

[scene]
layout = "targets"
targets = [ { row = 0, col = 1, range = 1.5, reflectivity = 0.5 }, { row = 1, col = 1, range = 2 } ]
drift = "sinusoid"
drift_amplitude = 3.14
drift_frequency = 125

[sampling]
fs = 5e6
frames = 3
seed = 7
"""
    cfg = parse_config(text)
    assert cfg.linewidth == 1e5
    assert cfg.sigma == pytest.approx(math.sqrt(0.5))
    sc = cfg.build_scene()
    assert set(sc.targets) == {(0, 1), (1, 1)}
    assert isinstance(sc.drift, SinusoidDrift)
    assert cfg.fs == 5e6 and cfg.frames == 3 and cfg.seed == 7


@pytest.mark.parametrize("text,needle", [
    ("[lazer]\nbandwidth = 1e9", "unknown section"),
    ("[laser]\nbandwith = 1e9", "unknown key"),
    ("[laser]\nbandwidth = \"big\"", "laser.bandwidth"),
    ("[laser]\nbandwidth = -1e9", "[laser]"),
    ("[array]\nn = 2.5", "array.n"),
    ("[array]\nn = true", "array.n"),
    ("[array]\nreadout = \"star\"", "array.readout"),
    ("[noise]\nsigma = -1", "noise.sigma"),
    ("[scene]\nlayout = \"spiral\"", "scene.layout"),
    ("[scene]\nrange = 1e6", "round trip"),
    ("[scene]\nlayout = \"targets\"\ntargets = [{ row = 9, col = 0, range = 1 }]", "outside"),
    ("[scene]\nlayout = \"targets\"\ntargets = [{ row = 0, col = 0 }]", "missing"),
    ("[scene]\ntargets = [{ row = 0, col = 0, range = 1 }]", "only allowed"),
    ("[sampling]\nfs = \"fast\"", "sampling.fs"),
    ("[sampling]\nwindow = \"kaiser\"", "sampling.window"),
    ("[sampling]\nframes = 0", "sampling.frames"),
    ("[sampling]\nseed = -1", "sampling.seed"),
    ("[sampling]\nfs = nan", "finite"),
])
def test_rejections(text, needle):
    with pytest.raises(ConfigurationError, match=None) as e:
        parse_config(text)
    assert needle in str(e.value)


def test_undersampling_names_required_rate():
    with pytest.raises(ConfigurationError) as e:
        parse_config("[laser]\nbandwidth = 10e9\n[sampling]\nfs = 1e4")
    need = required_sample_rate(parse_config("[laser]\nbandwidth = 10e9").chirp, round_trip_delay(1.0))
    assert f"{need:.6g}" in str(e.value)


def test_syntax_error_reports_line():
    with pytest.raises(ConfigParseError) as e:
        parse_config("[laser]\nbandwidth = 1e9\nperiod = = 2\n")
    assert e.value.lineno == 3
    assert "line 3" in str(e.value)


def test_non_utf8_rejected():
    with pytest.raises(ConfigParseError):
        parse_config(b"\xff\xfe")


def test_dump_round_trip():
    cfg = parse_config("[laser]\nbandwidth = 1e11\n[scene]\nlayout = \"staircase\"\nstep = 0.05\n[noise]\nsnr_db = 3")
    again = parse_config(dump_config(cfg))
    assert again == cfg and again.values == cfg.values


@given(st.integers(0, 2**63 - 1))
def test_seed_override(seed):
    cfg = with_overrides(parse_config(""), seed=seed, out="elsewhere")
    assert cfg.seed == seed and cfg.out_dir == "elsewhere"


def test_replace_revalidates():
    cfg = parse_config("")
    assert cfg.replace(**{"laser.bandwidth": 1e9}).chirp.bandwidth == 1e9
    with pytest.raises(ConfigurationError):
        cfg.replace(**{"array.leakage": 2.0})


def test_phase_noise_drift_depends_on_seed():
    cfg = from_dict({"laser": {"bandwidth": 10e9}, "array": {"n": 2},
                     "scene": {"drift": "phase-noise", "drift_linewidth": 10.0}})
    a, b = cfg.build_scene(1).drift, cfg.build_scene(2).drift
    assert a(1e-3) != b(1e-3)
    assert a(1e-3) == cfg.build_scene(1).drift(1e-3)
