from .chroma import chroma, chroma_bin_map, pitch_class_of
from .contrast import band_edges, peak_valley, spectral_contrast
from .extract import (FeatureKind, FeatureParams, FeatureVector, aggregate_frames,
                      extract_feature_set, frame_features, read_feature_cache,
                      split_combined, write_feature_cache)
from .mel import dct_matrix, hz_to_mel, log_mel, mel_filterbank, mel_to_hz, mfcc
from .spectral import Spectrogram, fft_frequencies, hann_window, stft

__all__ = [
    "FeatureKind", "FeatureParams", "FeatureVector", "Spectrogram",
    "aggregate_frames", "band_edges", "chroma", "chroma_bin_map", "dct_matrix",
    "extract_feature_set", "fft_frequencies", "frame_features", "hann_window",
    "hz_to_mel", "log_mel", "mel_filterbank", "mel_to_hz", "mfcc", "peak_valley",
    "pitch_class_of", "read_feature_cache", "spectral_contrast", "split_combined",
    "stft", "write_feature_cache",
]
