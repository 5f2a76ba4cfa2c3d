"""Input checks shared by the estimator classes."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .traces import IqTrace


def check_iq(X, fs: float | None = None):
    """Coerce IQ input to a 2-D complex array ``(n_traces, n_samples)``.

    Accepts an :class:`IqTrace`, a sequence of them, a complex array
    (1-D or 2-D), or a real array whose last axis holds ``(I, Q)`` pairs.
    Returns ``(Z, fs)``; ``fs`` is taken from the traces when not given.
    """
    if isinstance(X, IqTrace):
        X = [X]
    if isinstance(X, Sequence) and len(X) and all(isinstance(t, IqTrace) for t in X):
        rates = {t.fs for t in X}
        if len(rates) != 1:
            raise ValueError(f"traces have mixed sample rates: {sorted(rates)}")
        lengths = {len(t) for t in X}
        if len(lengths) != 1:
            raise ValueError(f"traces have mixed lengths: {sorted(lengths)}")
        Z = np.stack([t.z for t in X])
        fs = X[0].fs if fs is None else fs
    else:
        Z = np.asarray(X)
        if Z.dtype == object:
            raise ValueError("IQ input must be numeric or a sequence of IqTrace")
        if not np.iscomplexobj(Z):
            Z = Z.astype(float)
            if Z.ndim >= 2 and Z.shape[-1] == 2:
                Z = Z[..., 0] + 1j * Z[..., 1]
            else:
                Z = Z.astype(complex)
        if Z.ndim == 1:
            Z = Z[None, :]
        if Z.ndim != 2:
            raise ValueError(f"expected 1-D or 2-D IQ data, got shape {Z.shape}")
    if Z.shape[0] == 0 or Z.shape[1] == 0:
        raise ValueError(f"IQ data is empty: shape {Z.shape}")
    if not np.all(np.isfinite(Z)):
        raise ValueError("IQ data contains NaN or inf")
    if fs is None:
        raise ValueError("sample rate is unknown; pass fs or use IqTrace input")
    check_positive(fs, "fs")
    return Z, float(fs)


def check_positive(value, name: str) -> float:
    v = float(value)
    if not (np.isfinite(v) and v > 0):
        raise ValueError(f"{name} must be a finite positive number, got {value!r}")
    return v


def check_fitted(est, attr: str):
    from sklearn.exceptions import NotFittedError

    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted yet; call fit() first")
