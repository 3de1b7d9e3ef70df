"""Single-cough segmentation and per-signal MinMax normalization."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .audio_io import CANONICAL_RATE, AudioClip
from .errors import EmptyInput, InvalidParams, InvalidRate

LABELS = ("negative", "positive")
DATASETS = ("COUGHVID", "Virufy", "synthetic")


@dataclass(frozen=True)
class SegmenterConfig:
    frame_length: int = 1024
    hop_length: int = 512
    k_on: float = 2.0
    k_off: float = 1.2
    min_rms: float = 0.0
    min_cough_duration: float = 0.2
    min_gap: float = 0.15
    pad: float = 0.05

    def __post_init__(self):
        if self.frame_length < 1 or self.hop_length < 1:
            raise InvalidParams("frame_length and hop_length must be >= 1")
        if self.k_off > self.k_on:
            raise InvalidParams("k_off must not exceed k_on")
        if min(self.min_cough_duration, self.min_gap, self.pad, self.min_rms) < 0:
            raise InvalidParams("durations and floors must be non-negative")


@dataclass(frozen=True)
class CoughSegment:
    samples: np.ndarray
    start_s: float
    end_s: float
    parent_id: str = ""
    label: str | None = None
    dataset: str = "synthetic"
    sample_rate: int = CANONICAL_RATE
    degenerate: bool = False
    index: int = 0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def segment_id(self) -> str:
        return f"{self.parent_id}#{self.index}"

    @property
    def duration(self) -> float:
        return self.end_s - self.start_s


def frame_rms(x: np.ndarray, frame_length: int, hop_length: int) -> np.ndarray:
    """RMS of zero-padded frames centered on ``t * hop_length``."""
    x = np.asarray(x, dtype=np.float64)
    half = frame_length // 2
    padded = np.concatenate([np.zeros(half), x, np.zeros(frame_length - half)])
    n_frames = 1 + len(x) // hop_length
    # Direct per-frame sums (not a running cumsum) so digital silence stays exactly 0.
    frames = np.lib.stride_tricks.sliding_window_view(padded, frame_length)[::hop_length][:n_frames]
    return np.sqrt(np.einsum("ij,ij->i", frames, frames) / frame_length)


def _active_runs(rms: np.ndarray, on: float, off: float):
    """Hysteresis gate: open above ``on``, close at or below ``off``.

    Closing on equality matters when the median RMS is 0 (digital silence):
    a strict comparison against a zero threshold could never release.
    """
    runs = []
    active = False
    begin = 0
    for t, r in enumerate(rms):
        if not active and r > on:
            active, begin = True, t
        elif active and r <= off:
            runs.append((begin, t - 1))
            active = False
    if active:
        runs.append((begin, len(rms) - 1))
    return runs


def _refine(x, lo, hi, threshold, first):
    """Sample-accurate edge: first/last |x| above ``threshold`` within [lo, hi)."""
    lo, hi = max(lo, 0), min(hi, len(x))
    hits = np.flatnonzero(np.abs(x[lo:hi]) > threshold)
    if len(hits) == 0:
        return None
    return lo + int(hits[0] if first else hits[-1])


def segment_coughs(clip: AudioClip, cfg: SegmenterConfig = SegmenterConfig(),
                   label: str | None = None, dataset: str = "synthetic") -> list[CoughSegment]:
    """Split a recording into single-cough segments with an energy gate.

    Frame RMS is compared against multiples of its median, so the gate
    adapts to the recording's noise floor. Edges are refined to the sample
    level inside the first/last active frame, short gaps are bridged, short
    events dropped, and each survivor is padded and clamped to the clip.
    """
    if clip.sample_rate <= 0:
        raise InvalidRate("clip has no valid sample rate")
    x = np.asarray(clip.samples, dtype=np.float64)
    if len(x) == 0:
        return []
    sr = clip.sample_rate
    hop = cfg.hop_length
    rms = frame_rms(x, cfg.frame_length, hop)
    med = float(np.median(rms))
    on = max(cfg.k_on * med, cfg.min_rms)
    off = max(cfg.k_off * med, cfg.min_rms)

    events = []
    for a, b in _active_runs(rms, on, off):
        ca, cb = a * hop, b * hop
        half = cfg.frame_length // 2
        start = _refine(x, ca - half, ca + half, on, first=True)
        end = _refine(x, cb - half, cb + half, on, first=False)
        start = ca if start is None else start
        end = min(cb, len(x) - 1) if end is None else end
        if end < start:
            continue
        events.append([start, end + 1, a, b])

    min_gap = int(round(cfg.min_gap * sr))
    merged = []
    for ev in events:
        if merged and ev[0] - merged[-1][1] < min_gap:
            merged[-1][1] = max(merged[-1][1], ev[1])
            merged[-1][3] = ev[3]
        else:
            merged.append(list(ev))

    pad = int(round(cfg.pad * sr))
    min_len = cfg.min_cough_duration * sr
    segments = []
    for start, stop, a, b in merged:
        if stop - start < min_len:
            continue
        if rms[a:b + 1].mean() < on:
            continue
        s0 = max(0, start - pad)
        s1 = min(len(x), stop + pad)
        if segments and s0 < segments[-1][1]:
            s0 = segments[-1][1]
        segments.append((s0, s1))

    return [
        CoughSegment(x[s0:s1], s0 / sr, s1 / sr, parent_id=clip.source_id,
                     label=label, dataset=dataset, sample_rate=sr, index=i)
        for i, (s0, s1) in enumerate(segments)
    ]


def minmax(x: np.ndarray) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    if len(x) == 0:
        raise EmptyInput("cannot normalize an empty signal")
    lo, hi = x.min(), x.max()
    span = hi - lo
    if not span > 0:
        return np.zeros_like(x), True
    return (x - lo) / span, False


def normalize_signal(segment: CoughSegment) -> CoughSegment:
    """Rescale samples to [0, 1]; constant signals become zeros and are flagged."""
    y, degenerate = minmax(segment.samples)
    return replace(segment, samples=y, degenerate=degenerate or segment.degenerate)
