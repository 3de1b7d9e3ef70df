"""Cough-sound screening toolkit: audio ingestion, segmentation, acoustic
features (MFCC, chroma, spectral contrast), MLP and SVM classifiers, and a
scenario-based experiment runner."""
from .audio_io import CANONICAL_RATE, AudioClip, canonicalize, decode_wav, read_wav, resample
from .preprocess import CoughSegment, SegmenterConfig, normalize_signal, segment_coughs

__version__ = "0.1.0"

__all__ = [
    "CANONICAL_RATE", "AudioClip", "CoughSegment", "SegmenterConfig", "canonicalize",
    "decode_wav", "normalize_signal", "read_wav", "resample", "segment_coughs",
]
