"""Octave-band spectral contrast."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..errors import InvalidParams
from .spectral import Spectrogram, fft_frequencies

N_BANDS = 6
FMIN_HZ = 200.0
QUANTILE = 0.02
EPS = 1e-10


@lru_cache(maxsize=16)
def band_edges(n_fft: int, sample_rate: int, n_bands: int = N_BANDS,
               fmin: float = FMIN_HZ) -> tuple[tuple[int, int], ...]:
    """Bin index ranges ``[lo, hi)`` for ``[0, fmin)`` and ``n_bands`` octaves.

    The top octave is extended to include every bin up to Nyquist.
    """
    if n_bands < 1:
        raise InvalidParams(f"n_bands must be >= 1, got {n_bands}")
    if fmin <= 0:
        raise InvalidParams(f"fmin must be positive, got {fmin}")
    nyquist = sample_rate / 2.0
    lows = np.concatenate([[0.0], fmin * 2.0 ** np.arange(n_bands)])
    if lows[-1] >= nyquist:
        raise InvalidParams(f"band starting at {lows[-1]:.1f} Hz exceeds Nyquist {nyquist:.1f} Hz")
    freqs = fft_frequencies(sample_rate, n_fft)
    cuts = np.searchsorted(freqs, lows[1:], side="left")
    bounds = np.concatenate([[0], cuts, [len(freqs)]]).astype(int)
    ranges = tuple((int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]))
    if any(hi <= lo for lo, hi in ranges):
        raise InvalidParams("a sub-band contains no FFT bins; raise n_fft or fmin")
    return ranges


def peak_valley(spec: Spectrogram, n_bands: int = N_BANDS, fmin: float = FMIN_HZ,
                quantile: float = QUANTILE, eps: float = EPS):
    """Per-band log peak and log valley, each shaped ``(n_frames, n_bands + 1)``."""
    if not 0.0 < quantile < 0.5:
        raise InvalidParams(f"quantile must lie in (0, 0.5), got {quantile}")
    ranges = band_edges(spec.n_fft, spec.sample_rate, n_bands, fmin)
    mags = spec.magnitudes
    peak = np.empty((mags.shape[0], len(ranges)))
    valley = np.empty_like(peak)
    for k, (lo, hi) in enumerate(ranges):
        band = np.sort(mags[:, lo:hi], axis=1)
        q = max(1, int(np.rint(quantile * (hi - lo))))
        valley[:, k] = np.log(eps + band[:, :q].mean(axis=1))
        peak[:, k] = np.log(eps + band[:, -q:].mean(axis=1))
    return peak, valley


def spectral_contrast(spec: Spectrogram, n_bands: int = N_BANDS, fmin: float = FMIN_HZ,
                      quantile: float = QUANTILE, eps: float = EPS) -> np.ndarray:
    """Peak minus valley log magnitude per sub-band, shape ``(n_frames, n_bands + 1)``."""
    peak, valley = peak_valley(spec, n_bands, fmin, quantile, eps)
    return peak - valley
