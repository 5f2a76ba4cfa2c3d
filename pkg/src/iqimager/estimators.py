"""scikit-learn compatible wrappers around the beat-spectrum pipeline.

Rows of ``X`` are IQ records (complex samples, ``(I, Q)`` pairs, or
:class:`~iqimager.traces.IqTrace` objects), so the estimators drop into
pipelines and grid searches like any other transformer or regressor.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin

from .dsp import DEFAULT_SNR_THRESHOLD_DB, OK, beat_spectrum, estimate_beat_frequency, range_from_beat, window
from .traces import IqTrace
from .validation import check_fitted, check_iq, check_positive


def _estimate_rows(Z, fs, window_kind, zero_pad, snr_threshold_db):
    out = np.empty((len(Z), 3))
    for k, z in enumerate(Z):
        tr = IqTrace.from_complex(z, fs)
        est = estimate_beat_frequency(beat_spectrum(window(tr, window_kind), zero_pad), snr_threshold_db)
        out[k] = est.frequency, est.snr_db, est.quality == OK
    return out


class BeatFrequencyEstimator(TransformerMixin, BaseEstimator):
    """Map IQ records to ``[beat frequency (Hz), peak SNR (dB), valid (0/1)]``.

    Parameters
    ----------
    fs : float, optional
        Sample rate. Required unless ``X`` is given as ``IqTrace`` objects.
    window : {"hann", "rect", "blackman"}
    zero_pad : int
        Transform length multiplier on top of the next power of two.
    snr_threshold_db : float
        Peaks below this SNR are reported invalid.
    """

    def __init__(self, fs=None, window="hann", zero_pad=2, snr_threshold_db=DEFAULT_SNR_THRESHOLD_DB):
        self.fs = fs
        self.window = window
        self.zero_pad = zero_pad
        self.snr_threshold_db = snr_threshold_db

    def fit(self, X, y=None):
        Z, fs = check_iq(X, self.fs)
        self.fs_ = fs
        self.n_features_in_ = Z.shape[1]
        return self

    def transform(self, X):
        check_fitted(self, "fs_")
        Z, fs = check_iq(X, self.fs_ if self.fs is None else self.fs)
        if Z.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {Z.shape[1]} samples per record, expected {self.n_features_in_}")
        return _estimate_rows(Z, fs, self.window, self.zero_pad, self.snr_threshold_db)


class RangeEstimator(RegressorMixin, BaseEstimator):
    """Predict target range (m) from IQ records of a chirp with known slope.

    ``fit`` with ground-truth ranges learns a constant range offset
    (``offset_``), e.g. fibre or on-chip path length in a calibration target;
    without ``y`` the offset is zero.
    """

    def __init__(self, slope=1e13, fs=None, window="hann", zero_pad=2,
                 snr_threshold_db=DEFAULT_SNR_THRESHOLD_DB):
        self.slope = slope
        self.fs = fs
        self.window = window
        self.zero_pad = zero_pad
        self.snr_threshold_db = snr_threshold_db

    def _raw(self, X, fs):
        Z, fs = check_iq(X, fs)
        est = _estimate_rows(Z, fs, self.window, self.zero_pad, self.snr_threshold_db)
        r = range_from_beat(est[:, 0], self.slope)
        r = np.where(est[:, 2] > 0, r, np.nan)
        return Z, fs, r

    def fit(self, X, y=None):
        check_positive(self.slope, "slope")
        Z, fs, r = self._raw(X, self.fs)
        self.fs_ = fs
        self.n_features_in_ = Z.shape[1]
        if y is None:
            self.offset_ = 0.0
        else:
            y = np.asarray(y, dtype=float).ravel()
            if y.shape[0] != r.shape[0]:
                raise ValueError(f"got {r.shape[0]} records but {y.shape[0]} target ranges")
            good = np.isfinite(r)
            if not np.any(good):
                raise ValueError("no record produced a valid peak; cannot calibrate")
            self.offset_ = float(np.mean(y[good] - r[good]))
        return self

    def predict(self, X):
        """Ranges in metres; NaN where no valid peak was found."""
        check_fitted(self, "offset_")
        _, _, r = self._raw(X, self.fs_ if self.fs is None else self.fs)
        return r + self.offset_


class IQImbalanceCorrector(TransformerMixin, BaseEstimator):
    """Blind Gram-Schmidt correction of quadrature gain and phase error.

    ``fit`` measures ``gain_ = rms(Q)/rms(I)`` and the skew
    ``phase_error_ = -asin(<IQ> / (rms(I) rms(Q)))`` over all records; the
    estimates hold for a tone (or any signal with a uniformly distributed
    phase). ``transform`` rebuilds an orthogonal, equal-power Q.
    """

    def __init__(self, fs=1.0):
        self.fs = fs

    def fit(self, X, y=None):
        Z, _ = check_iq(X, self.fs)
        i, q = Z.real.ravel(), Z.imag.ravel()
        pi, pq = np.mean(i * i), np.mean(q * q)
        if not (pi > 0 and pq > 0):
            raise ValueError("both quadratures need nonzero power to estimate imbalance")
        s = np.mean(i * q) / np.sqrt(pi * pq)
        self.gain_ = float(np.sqrt(pq / pi))
        self.phase_error_ = float(-np.arcsin(np.clip(s, -1, 1)))
        self.n_features_in_ = Z.shape[1]
        return self

    def transform(self, X):
        check_fitted(self, "gain_")
        Z, _ = check_iq(X, self.fs)
        i, q = Z.real, Z.imag
        eps = self.phase_error_
        q_fixed = (q / self.gain_ + i * np.sin(eps)) / np.cos(eps)
        return i + 1j * q_fixed
