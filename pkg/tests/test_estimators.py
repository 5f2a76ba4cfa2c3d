import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from iqimager.estimators import BeatFrequencyEstimator, IQImbalanceCorrector, RangeEstimator
from iqimager.laser import ChirpConfig
from iqimager.metrics import auto_sample_rate
from iqimager.receiver import HybridConfig, image_rejection_ratio, simulate_pixel
from iqimager.scene import round_trip_delay
from iqimager.traces import IqTrace
from iqimager.validation import check_iq

CH = ChirpConfig(bandwidth=10e9, period=1e-3)
RANGES = [0.5, 1.0, 1.7, 2.3]
FS = auto_sample_rate(CH, max(RANGES))


def traces(ranges=RANGES, hybrid=None):
    kw = {} if hybrid is None else dict(hybrid=hybrid)
    return [simulate_pixel(CH, [(round_trip_delay(r), 1.0, 0.4)], FS, **kw) for r in ranges]


def test_get_params_and_clone():
    est = RangeEstimator(slope=CH.slope, fs=FS, window="rect")
    p = est.get_params()
    assert p == dict(slope=CH.slope, fs=FS, window="rect", zero_pad=2, snr_threshold_db=6.0)
    c = clone(est.set_params(zero_pad=4))
    assert c.get_params()["zero_pad"] == 4 and not hasattr(c, "offset_")


def test_beat_transformer():
    out = BeatFrequencyEstimator().fit_transform(traces())
    assert out.shape == (4, 3)
    assert np.all(out[:, 2] == 1)
    expected = 2 * CH.slope * np.array(RANGES) / 299792458.0
    bin_hz = FS / round(FS * CH.period)
    assert np.max(np.abs(out[:, 0] - expected)) < 0.05 * bin_hz


def test_beat_transformer_accepts_arrays():
    Z = np.stack([t.z for t in traces()])
    a = BeatFrequencyEstimator(fs=FS).fit_transform(Z)
    b = BeatFrequencyEstimator(fs=FS).fit_transform(np.stack([Z.real, Z.imag], axis=-1))
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        BeatFrequencyEstimator(fs=FS).fit(Z).transform(Z[:, :100])


def test_range_estimator_predicts_ranges():
    est = RangeEstimator(slope=CH.slope).fit(traces())
    assert est.offset_ == 0.0
    assert est.predict(traces()) == pytest.approx(RANGES, abs=1e-3)


def test_range_estimator_calibrates_offset():
    y = np.array(RANGES) + 0.25
    est = RangeEstimator(slope=CH.slope).fit(traces(), y)
    assert est.offset_ == pytest.approx(0.25, abs=1e-3)
    assert est.score(traces(), y) > 0.999


def test_range_estimator_nan_for_silent_rows():
    silent = IqTrace(np.zeros(len(traces()[0])), np.zeros(len(traces()[0])), FS)
    est = RangeEstimator(slope=CH.slope).fit(traces())
    r = est.predict(traces()[:1] + [silent])
    assert np.isfinite(r[0]) and np.isnan(r[1])


def test_not_fitted():
    with pytest.raises(NotFittedError):
        RangeEstimator().predict(traces())
    with pytest.raises(NotFittedError):
        BeatFrequencyEstimator().transform(traces())
    with pytest.raises(NotFittedError):
        IQImbalanceCorrector().transform(np.ones(8, complex))


def test_bad_inputs():
    with pytest.raises(ValueError):
        RangeEstimator(slope=-1.0).fit(traces())
    with pytest.raises(ValueError):
        check_iq(np.ones(16))
    with pytest.raises(ValueError):
        check_iq(np.array([np.nan, 1.0]), 1.0)
    with pytest.raises(ValueError):
        check_iq(np.ones((2, 2, 2, 3)), 1.0)
    with pytest.raises(ValueError):
        check_iq([IqTrace(np.ones(4), np.ones(4), 1.0), IqTrace(np.ones(4), np.ones(4), 2.0)])


def test_corrector_restores_image_rejection():
    hy = HybridConfig(phase_error=0.1, amplitude_imbalance=0.05)
    bad = traces([1.0], hybrid=hy)
    assert image_rejection_ratio(bad[0]) < 30
    corr = IQImbalanceCorrector(fs=FS).fit(bad)
    assert corr.phase_error_ == pytest.approx(0.1, abs=5e-3)
    assert corr.gain_ == pytest.approx(1.05, abs=5e-3)
    fixed = IqTrace.from_complex(corr.transform(bad)[0], FS)
    assert image_rejection_ratio(fixed) > 50


def test_pipeline():
    hy = HybridConfig(phase_error=0.1)
    pipe = make_pipeline(IQImbalanceCorrector(fs=FS), RangeEstimator(slope=CH.slope, fs=FS))
    r = pipe.fit(traces(hybrid=hy)).predict(traces(hybrid=hy))
    assert r == pytest.approx(RANGES, abs=1e-3)
