"""Short-time Fourier transform."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import InvalidParams

N_FFT = 2048
HOP_LENGTH = 512
SAMPLE_RATE = 22050


@dataclass(frozen=True)
class Spectrogram:
    """Frame-major magnitude matrix, shape ``(n_frames, n_fft // 2 + 1)``."""

    magnitudes: np.ndarray
    n_fft: int
    hop: int
    sample_rate: int

    @property
    def n_frames(self) -> int:
        return self.magnitudes.shape[0]

    @property
    def n_bins(self) -> int:
        return self.magnitudes.shape[1]

    def frequencies(self) -> np.ndarray:
        return fft_frequencies(self.sample_rate, self.n_fft)


def fft_frequencies(sample_rate: int, n_fft: int) -> np.ndarray:
    return np.arange(n_fft // 2 + 1) * (sample_rate / n_fft)


@lru_cache(maxsize=8)
def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window (the DFT-even variant used for spectral analysis)."""
    w = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)
    w.setflags(write=False)
    return w


def check_stft_params(n_fft: int, hop: int) -> None:
    if hop is None or hop < 1:
        raise InvalidParams(f"hop must be a positive integer, got {hop}")
    if n_fft < 2 or n_fft & (n_fft - 1):
        raise InvalidParams(f"n_fft must be a power of two >= 2, got {n_fft}")


def frame_signal(x: np.ndarray, n_fft: int, hop: int) -> np.ndarray:
    """Centered frames, shape ``(1 + len(x) // hop, n_fft)``.

    Signals shorter than ``n_fft`` are zero-padded to ``n_fft`` first; the
    ends are then reflection-padded by ``n_fft // 2``.
    """
    x = np.asarray(x, dtype=np.float64)
    if len(x) == 0:
        raise InvalidParams("cannot frame an empty signal")
    n_frames = 1 + len(x) // hop
    if len(x) < n_fft:
        x = np.concatenate([x, np.zeros(n_fft - len(x))])
    padded = np.pad(x, n_fft // 2, mode="reflect")
    idx = np.arange(n_frames)[:, None] * hop + np.arange(n_fft)[None, :]
    return padded[idx]


def stft(samples, n_fft: int = N_FFT, hop: int = HOP_LENGTH,
         sample_rate: int = SAMPLE_RATE) -> Spectrogram:
    """Magnitude STFT of a 1-D signal with a periodic Hann window.

    Frame ``t`` is centered on sample ``t * hop``. Accepts a raw array or
    anything with ``samples`` / ``sample_rate`` attributes.
    """
    if hasattr(samples, "samples"):
        sample_rate = getattr(samples, "sample_rate", sample_rate)
        samples = samples.samples
    check_stft_params(n_fft, hop)
    frames = frame_signal(samples, n_fft, hop) * hann_window(n_fft)
    mags = np.abs(np.fft.rfft(frames, n=n_fft, axis=1))
    return Spectrogram(mags, n_fft, hop, int(sample_rate))
