"""Mel filterbank, orthonormal DCT-II and MFCCs."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..errors import InvalidParams
from .spectral import Spectrogram, fft_frequencies

N_MELS = 128
N_MFCC = 13
LOG_FLOOR = 1e-10

# Slaney mel: linear below 1 kHz, logarithmic above.
_F_SP = 200.0 / 3
_MIN_LOG_HZ = 1000.0
_MIN_LOG_MEL = _MIN_LOG_HZ / _F_SP
_LOGSTEP = np.log(6.4) / 27.0


def hz_to_mel(freqs):
    f = np.asarray(freqs, dtype=np.float64)
    mels = f / _F_SP
    high = f >= _MIN_LOG_HZ
    return np.where(high, _MIN_LOG_MEL + np.log(np.maximum(f, _MIN_LOG_HZ) / _MIN_LOG_HZ) / _LOGSTEP, mels)


def mel_to_hz(mels):
    m = np.asarray(mels, dtype=np.float64)
    freqs = _F_SP * m
    high = m >= _MIN_LOG_MEL
    return np.where(high, _MIN_LOG_HZ * np.exp(_LOGSTEP * (m - _MIN_LOG_MEL)), freqs)


@lru_cache(maxsize=16)
def mel_filterbank(n_filters: int = N_MELS, n_fft: int = 2048, sample_rate: int = 22050,
                   fmin: float = 0.0, fmax: float | None = None, area_norm: bool = True) -> np.ndarray:
    """Triangular mel filters, shape ``(n_filters, n_fft // 2 + 1)``.

    Filter edges are equally spaced on the mel axis between ``fmin`` and
    ``fmax`` (Nyquist by default). With ``area_norm`` each triangle is scaled
    by ``2 / bandwidth_hz`` so filters have roughly constant energy per band.
    The result is cached and read-only.
    """
    if n_filters < N_MFCC:
        raise InvalidParams(f"need at least {N_MFCC} mel filters, got {n_filters}")
    if n_fft < 2 or sample_rate <= 0:
        raise InvalidParams("n_fft and sample_rate must be positive")
    fmax = sample_rate / 2.0 if fmax is None else float(fmax)
    if not 0.0 <= fmin < fmax <= sample_rate / 2.0:
        raise InvalidParams(f"need 0 <= fmin < fmax <= Nyquist, got fmin={fmin} fmax={fmax}")

    bins = fft_frequencies(sample_rate, n_fft)
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_filters + 2))
    widths = np.diff(edges)
    ramps = edges[:, None] - bins[None, :]
    rising = -ramps[:-2] / widths[:-1, None]
    falling = ramps[2:] / widths[1:, None]
    fb = np.maximum(0.0, np.minimum(rising, falling))
    if area_norm:
        fb *= (2.0 / (edges[2:] - edges[:-2]))[:, None]
    empty = np.flatnonzero(fb.max(axis=1) <= 0)
    if len(empty):
        raise InvalidParams(f"{len(empty)} mel filters cover no FFT bin; lower n_filters or raise n_fft")
    fb.setflags(write=False)
    return fb


@lru_cache(maxsize=16)
def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II basis; ``dct_matrix(n) @ v`` transforms ``v``."""
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    basis = np.cos(np.pi / n * (j + 0.5) * k) * np.sqrt(2.0 / n)
    basis[0] /= np.sqrt(2.0)
    basis.setflags(write=False)
    return basis


def log_mel(spec: Spectrogram, n_filters: int = N_MELS, floor: float = LOG_FLOOR) -> np.ndarray:
    fb = mel_filterbank(n_filters, spec.n_fft, spec.sample_rate)
    power = spec.magnitudes ** 2
    return np.log(np.maximum(power @ fb.T, floor))


def cepstrum(log_mel_frames: np.ndarray, n_coeffs: int = N_MFCC) -> np.ndarray:
    n = log_mel_frames.shape[1]
    if not 1 <= n_coeffs <= n:
        raise InvalidParams(f"n_coeffs must lie in [1, {n}], got {n_coeffs}")
    return log_mel_frames @ dct_matrix(n)[:n_coeffs].T


def mfcc(spec: Spectrogram, n_coeffs: int = N_MFCC, n_filters: int = N_MELS) -> np.ndarray:
    """MFCC frames, shape ``(n_frames, n_coeffs)``.

    Power spectrum -> mel filterbank -> natural log with a 1e-10 floor ->
    orthonormal DCT-II, keeping the leading coefficients.
    """
    return cepstrum(log_mel(spec, n_filters), n_coeffs)
