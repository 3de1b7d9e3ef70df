"""Pitch-class (chroma) profile by nearest-pitch bin averaging."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .spectral import Spectrogram, fft_frequencies

N_CHROMA = 12
A4_HZ = 440.0
FMIN_HZ = 32.70319566257483  # C1
PITCH_CLASSES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")


def pitch_class_of(freqs, tuning_hz: float = A4_HZ) -> np.ndarray:
    """Nearest 12-TET pitch class (C=0) for each frequency; NaN-safe only for f > 0."""
    midi = 69.0 + 12.0 * np.log2(np.asarray(freqs, dtype=np.float64) / tuning_hz)
    return np.mod(np.rint(midi).astype(np.int64), N_CHROMA)


@lru_cache(maxsize=16)
def chroma_bin_map(n_fft: int, sample_rate: int, fmin: float = FMIN_HZ) -> np.ndarray:
    """Averaging matrix ``(12, n_bins)``: row k is ``1/N_k`` on the bins of class k."""
    freqs = fft_frequencies(sample_rate, n_fft)
    keep = freqs >= fmin
    classes = np.full(len(freqs), -1)
    classes[keep] = pitch_class_of(freqs[keep])
    m = np.zeros((N_CHROMA, len(freqs)))
    for k in range(N_CHROMA):
        members = classes == k
        count = members.sum()
        if count:
            m[k, members] = 1.0 / count
    m.setflags(write=False)
    return m


def chroma(spec: Spectrogram, fmin: float = FMIN_HZ) -> np.ndarray:
    """Chroma frames, shape ``(n_frames, 12)``.

    Each pitch class gets the mean STFT magnitude over the bins whose nearest
    equal-tempered pitch belongs to that class. Bins below ``fmin`` are ignored.
    """
    return spec.magnitudes @ chroma_bin_map(spec.n_fft, spec.sample_rate, fmin).T
