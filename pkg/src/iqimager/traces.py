"""Sampled IQ photocurrent traces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class IqTrace:
    """In-phase and quadrature photocurrents of one pixel during one chirp.

    ``pixel`` is ``(row, col)`` or None for a standalone trace; ``chirp`` is
    the index of the sweep the samples were taken in. ``window`` and
    ``coherent_gain`` record any taper already applied to the samples.
    """

    i: np.ndarray
    q: np.ndarray
    fs: float
    pixel: tuple[int, int] | None = None
    chirp: int = 0
    window: str = "rect"
    coherent_gain: float = 1.0

    def __post_init__(self):
        i = np.asarray(self.i, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if i.ndim != 1 or i.shape != q.shape:
            raise ValueError(f"I and Q must be 1-D and equally long, got {i.shape} and {q.shape}")
        if not self.fs > 0:
            raise ValueError(f"sample rate must be > 0, got {self.fs!r}")
        i.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "q", q)
        if self.pixel is not None:
            object.__setattr__(self, "pixel", (int(self.pixel[0]), int(self.pixel[1])))

    def __len__(self) -> int:
        return len(self.i)

    @property
    def z(self) -> np.ndarray:
        """Complex baseband ``I + jQ``."""
        return self.i + 1j * self.q

    @classmethod
    def from_complex(cls, z, fs: float, **kw) -> "IqTrace":
        z = np.asarray(z)
        return cls(z.real.copy(), z.imag.copy(), fs, **kw)

    def with_samples(self, i, q) -> "IqTrace":
        return IqTrace(i, q, self.fs, self.pixel, self.chirp, self.window, self.coherent_gain)

    def equals(self, other: "IqTrace") -> bool:
        """Bit-exact comparison of samples and labels."""
        return (
            self.fs == other.fs
            and self.pixel == other.pixel
            and self.chirp == other.chirp
            and np.array_equal(self.i, other.i)
            and np.array_equal(self.q, other.q)
        )
