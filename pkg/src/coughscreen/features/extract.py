"""Fixed-length feature vectors per segment, and the CSV feature cache."""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DimensionMismatch, EmptyInput, MissingColumn, NonFiniteInput
from .chroma import chroma
from .contrast import N_BANDS, spectral_contrast
from .mel import N_MELS, N_MFCC, mfcc
from .spectral import HOP_LENGTH, N_FFT, stft


class FeatureKind(str, enum.Enum):
    MFCC = "mfcc"
    CHROMA = "chroma"
    CONTRAST = "contrast"
    COMBINED = "combined"

    @classmethod
    def parse(cls, value) -> "FeatureKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown feature kind {value!r}; expected one of "
                             f"{[k.value for k in cls]}") from None


@dataclass(frozen=True)
class FeatureParams:
    n_fft: int = N_FFT
    hop_length: int = HOP_LENGTH
    n_mels: int = N_MELS
    n_mfcc: int = N_MFCC
    n_bands: int = N_BANDS

    def dim(self, kind: FeatureKind) -> int:
        kind = FeatureKind.parse(kind)
        dims = {FeatureKind.MFCC: self.n_mfcc, FeatureKind.CHROMA: 12,
                FeatureKind.CONTRAST: self.n_bands + 1}
        if kind is FeatureKind.COMBINED:
            return sum(dims.values())
        return dims[kind]


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    kind: FeatureKind
    segment_ref: str = ""
    label: str | None = None
    dataset: str = ""
    group: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise DimensionMismatch("feature values must be one-dimensional")
        if not np.all(np.isfinite(v)):
            raise NonFiniteInput(f"non-finite feature values for {self.segment_ref!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "kind", FeatureKind.parse(self.kind))


def aggregate_frames(frames) -> np.ndarray:
    """Mean over frames: ``(n_frames, d) -> (d,)``."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2 or frames.shape[0] == 0:
        raise EmptyInput(f"need a non-empty (n_frames, d) matrix, got shape {frames.shape}")
    return frames.mean(axis=0)


def frame_features(samples, kind: FeatureKind, params: FeatureParams = FeatureParams(),
                   sample_rate: int = 22050) -> np.ndarray:
    kind = FeatureKind.parse(kind)
    spec = stft(samples, params.n_fft, params.hop_length, sample_rate)
    parts = []
    if kind in (FeatureKind.MFCC, FeatureKind.COMBINED):
        parts.append(mfcc(spec, params.n_mfcc, params.n_mels))
    if kind in (FeatureKind.CHROMA, FeatureKind.COMBINED):
        parts.append(chroma(spec))
    if kind in (FeatureKind.CONTRAST, FeatureKind.COMBINED):
        parts.append(spectral_contrast(spec, params.n_bands))
    return np.hstack(parts)


def extract_feature_set(segment, kind, params: FeatureParams = FeatureParams()) -> FeatureVector:
    """STFT -> descriptor(s) -> frame mean for one (normalized) segment.

    ``COMBINED`` concatenates MFCC, chroma and contrast in that order.
    """
    kind = FeatureKind.parse(kind)
    values = aggregate_frames(frame_features(segment.samples, kind, params, segment.sample_rate))
    return FeatureVector(values, kind, segment_ref=segment.segment_id, label=segment.label,
                         dataset=segment.dataset, group=segment.parent_id)


def split_combined(values, params: FeatureParams = FeatureParams()) -> dict[FeatureKind, np.ndarray]:
    """Inverse of the COMBINED concatenation."""
    values = np.asarray(values)
    a = params.n_mfcc
    b = a + 12
    return {FeatureKind.MFCC: values[:a], FeatureKind.CHROMA: values[a:b],
            FeatureKind.CONTRAST: values[b:]}


CACHE_COLUMNS = ("segment_id", "dataset", "label", "kind")


def write_feature_cache(path, vectors, group_column: bool = True) -> None:
    """One row per vector; floats written with 17 significant digits.

    All vectors must share a length; mixing kinds of equal length is allowed.
    """
    vectors = list(vectors)
    dim = len(vectors[0].values) if vectors else 0
    if any(len(v.values) != dim for v in vectors):
        raise DimensionMismatch("feature cache rows must share one dimensionality")
    header = list(CACHE_COLUMNS) + (["group"] if group_column else []) + [f"v{i}" for i in range(dim)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for v in vectors:
            row = [v.segment_ref, v.dataset, v.label or "", v.kind.value]
            if group_column:
                row.append(v.group)
            w.writerow(row + [format(float(x), ".17g") for x in v.values])


def read_feature_cache(path) -> list[FeatureVector]:
    with open(Path(path), newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumn(f"{path}: empty feature cache") from None
        missing = [c for c in CACHE_COLUMNS if c not in header]
        if missing:
            raise MissingColumn(f"{path}: missing columns {missing}")
        col = {name: i for i, name in enumerate(header)}
        vcols = [col[f"v{i}"] for i in range(sum(h.startswith("v") and h[1:].isdigit() for h in header))]
        out = []
        for row in reader:
            out.append(FeatureVector(
                np.array([float(row[i]) for i in vcols]),
                row[col["kind"]],
                segment_ref=row[col["segment_id"]],
                label=row[col["label"]] or None,
                dataset=row[col["dataset"]],
                group=row[col["group"]] if "group" in col else "",
            ))
        return out
