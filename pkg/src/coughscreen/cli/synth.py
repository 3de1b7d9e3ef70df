"""Synthetic two-class "cough" bursts for dataset-free end-to-end runs.

Class ``negative`` bursts carry band-limited noise in 300-800 Hz, class
``positive`` in 1-3 kHz. Envelopes (attack, decay, duration, level) are
randomized per burst. Everything is drawn from one seeded generator.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..audio_io import CANONICAL_RATE, AudioClip, write_wav
from ..errors import InvalidParams
from ..preprocess import CoughSegment

CLASS_BANDS = {"negative": (300.0, 800.0), "positive": (1000.0, 3000.0)}


def band_noise(n: int, band, sample_rate: int, rng) -> np.ndarray:
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, 1.0 / sample_rate)
    spectrum[(freqs < band[0]) | (freqs > band[1])] = 0.0
    x = np.fft.irfft(spectrum, n)
    return x / np.max(np.abs(x))


def burst(label: str, rng, sample_rate: int = CANONICAL_RATE) -> np.ndarray:
    n = int(rng.uniform(0.25, 0.5) * sample_rate)
    t = np.arange(n) / sample_rate
    attack = rng.uniform(0.01, 0.05)
    decay = rng.uniform(0.05, 0.15)
    env = np.minimum(t / attack, 1.0) * np.exp(-np.maximum(t - attack, 0.0) / decay)
    env *= 0.5 * (1 - np.cos(np.pi * np.minimum((n - 1 - np.arange(n)) / (0.01 * sample_rate), 1.0)))
    return rng.uniform(0.3, 0.9) * env * band_noise(n, CLASS_BANDS[label], sample_rate, rng)


def synth_dataset(per_class: int = 200, seed: int = 0, n_classes: int = 2,
                  datasets=("synthetic",), sample_rate: int = CANONICAL_RATE):
    """``per_class`` bursts of each class as ``(CoughSegment, label)`` pairs.

    Classes alternate in the output; the ``dataset`` tag cycles through
    ``datasets`` per class so both classes appear in every source.
    """
    if n_classes != 2:
        raise InvalidParams("only the binary (2-class) setting is supported")
    if per_class < 2:
        raise InvalidParams("need at least 2 examples per class")
    rng = np.random.default_rng(seed)
    out = []
    for i in range(per_class):
        for label in ("negative", "positive"):
            x = burst(label, rng, sample_rate)
            seg = CoughSegment(x, 0.0, len(x) / sample_rate, parent_id=f"synth-{label[:3]}-{i:05d}",
                               label=label, dataset=datasets[i % len(datasets)], sample_rate=sample_rate)
            out.append((seg, label))
    return out


def write_synth_recordings(out_dir, per_class: int = 200, seed: int = 0,
                           datasets=("COUGHVID", "Virufy"), max_bursts: int = 3,
                           noise_rms: float = 1e-4, sample_rate: int = CANONICAL_RATE) -> Path:
    """Write multi-burst WAV recordings plus ``manifest.csv``; returns the manifest path.

    Bursts are packed 1..``max_bursts`` per recording, separated by 0.6-1.0 s
    of low-level noise, so segmentation recovers exactly ``per_class``
    segments per class.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    rows = []
    rec = 0
    for label in ("negative", "positive"):
        remaining = per_class
        while remaining:
            k = int(min(remaining, rng.integers(1, max_bursts + 1)))
            remaining -= k
            parts = [noise_rms * rng.standard_normal(int(0.5 * sample_rate))]
            for _ in range(k):
                parts.append(burst(label, rng, sample_rate))
                parts.append(noise_rms * rng.standard_normal(int(rng.uniform(0.6, 1.0) * sample_rate)))
            name = f"rec{rec:05d}_{label}.wav"
            dataset = datasets[rec % len(datasets)]
            write_wav(out_dir / name, AudioClip(np.concatenate(parts), sample_rate, name))
            rows.append({"path": name, "dataset": dataset, "label": label,
                         "cough_detected": "1.0", "snr_db": "", "expert_quality": ""})
            rec += 1
    manifest = out_dir / "manifest.csv"
    with open(manifest, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return manifest
