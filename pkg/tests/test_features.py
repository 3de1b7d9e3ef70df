import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coughscreen.errors import DimensionMismatch, EmptyInput, InvalidParams, NonFiniteInput
from coughscreen.features import (FeatureKind, FeatureVector, Spectrogram, aggregate_frames,
                                  band_edges, chroma, chroma_bin_map, dct_matrix,
                                  extract_feature_set, frame_features, hann_window, hz_to_mel,
                                  mel_filterbank, mel_to_hz, mfcc, read_feature_cache,
                                  spectral_contrast, split_combined, stft, write_feature_cache)
from coughscreen.features.mel import cepstrum
from coughscreen.preprocess import CoughSegment
from conftest import tone
from oracles import mfcc_oracle

SR = 22050


def flat_spec(n_frames=3, value=1.0):
    return Spectrogram(np.full((n_frames, 1025), value), 2048, 512, SR)


# --- STFT ---------------------------------------------------------------

def test_stft_shape_and_frames():
    spec = stft(np.zeros(5000))
    assert spec.magnitudes.shape == (1 + 5000 // 512, 1025)
    assert np.all(spec.magnitudes == 0)


def test_dc_peaks_at_bin_zero():
    spec = stft(np.ones(8192))
    assert np.all(spec.magnitudes.argmax(axis=1) == 0)


def test_1khz_interior_frames_peak_at_bin_93():
    expected = round(1000 * 2048 / SR)
    spec = stft(tone(1000, SR, 1.0))
    interior = spec.magnitudes[2:-2]
    assert expected == 93
    assert np.all(interior.argmax(axis=1) == expected)


def test_short_signal_is_zero_padded():
    spec = stft(np.ones(10))
    assert spec.n_frames == 1 and np.all(np.isfinite(spec.magnitudes))


@pytest.mark.parametrize("n_fft,hop", [(2048, 0), (1000, 512), (2048, -1)])
def test_stft_invalid_params(n_fft, hop):
    with pytest.raises(InvalidParams):
        stft(np.ones(4096), n_fft, hop)


def test_periodic_hann():
    w = hann_window(8)
    np.testing.assert_allclose(w, 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(8) / 8))
    assert w[0] == 0.0 and w[4] == pytest.approx(1.0)


@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 6000))
def test_parseval_per_frame(seed, n):
    x = np.random.default_rng(seed).standard_normal(n)
    n_fft, hop = 256, 64
    spec = stft(x, n_fft, hop)
    xp = np.concatenate([x, np.zeros(max(0, n_fft - n))])
    padded = np.pad(xp, n_fft // 2, mode="reflect")
    win = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n_fft) / n_fft)
    for t in range(spec.n_frames):
        frame = padded[t * hop:t * hop + n_fft] * win
        m2 = spec.magnitudes[t] ** 2
        full = m2[0] + m2[-1] + 2 * m2[1:-1].sum()
        assert full == pytest.approx(n_fft * np.sum(frame ** 2), rel=1e-6, abs=1e-9)


def test_stft_matches_librosa():
    librosa = pytest.importorskip("librosa")
    x = np.random.default_rng(0).standard_normal(10000)
    ref = np.abs(librosa.stft(x, n_fft=2048, hop_length=512, center=True, pad_mode="reflect")).T
    np.testing.assert_allclose(stft(x).magnitudes, ref, atol=1e-9)


# --- mel / MFCC -----------------------------------------------------------

def test_mel_scale_points():
    assert hz_to_mel(0.0) == 0.0
    assert hz_to_mel(1000.0) == pytest.approx(15.0)
    f = np.array([0.0, 200.0, 999.0, 1000.0, 4321.0, 11025.0])
    np.testing.assert_allclose(mel_to_hz(hz_to_mel(f)), f, rtol=1e-12, atol=1e-9)


def test_filterbank_structure():
    fb = mel_filterbank(128, 2048, SR)
    assert fb.shape == (128, 1025)
    assert np.all(fb >= 0) and np.all(fb.max(axis=1) > 0) and np.all(fb.sum(axis=1) > 0)
    centers = fb.argmax(axis=1)
    assert np.all(np.diff(centers) >= 0)
    support = [set(np.flatnonzero(r)) for r in fb]
    for i in range(128):
        for j in range(i + 2, min(i + 6, 128)):
            assert not support[i] & support[j]
    with pytest.raises(ValueError):
        fb[0, 0] = 1.0


def test_filterbank_centres_strictly_increasing():
    fb = mel_filterbank(40, 2048, SR)
    edges = mel_to_hz(np.linspace(0, hz_to_mel(SR / 2), 42))
    assert np.all(np.diff(edges[1:-1]) > 0)
    assert np.all(np.diff(fb.argmax(axis=1)) > 0)


def test_filterbank_rejects_too_few_or_empty_filters():
    with pytest.raises(InvalidParams):
        mel_filterbank(12)
    with pytest.raises(InvalidParams):
        mel_filterbank(128, 64, SR)


def test_filterbank_matches_librosa():
    librosa = pytest.importorskip("librosa")
    ref = librosa.filters.mel(sr=SR, n_fft=2048, n_mels=128, htk=False, norm="slaney", dtype=np.float64)
    np.testing.assert_allclose(mel_filterbank(), ref, atol=1e-8)


def test_dct_against_scipy():
    from scipy.fft import dct
    v = np.random.default_rng(3).standard_normal(128)
    np.testing.assert_allclose(dct_matrix(128) @ v, dct(v, type=2, norm="ortho"), atol=1e-12)
    np.testing.assert_allclose(dct_matrix(16) @ dct_matrix(16).T, np.eye(16), atol=1e-12)


def test_constant_log_mel_gives_only_c0():
    c = -3.7
    coeffs = cepstrum(np.full((4, 128), c), 13)
    np.testing.assert_allclose(coeffs[:, 0], c * np.sqrt(128), rtol=1e-12)
    assert np.max(np.abs(coeffs[:, 1:])) < 1e-9


def test_silence_frames_identical():
    m = mfcc(stft(np.zeros(8000)))
    assert m.shape[1] == 13
    assert np.all(m == m[0])
    assert m[0, 0] == pytest.approx(np.log(1e-10) * np.sqrt(128))


def test_mfcc_distinguishes_440_and_880():
    specs = [stft(tone(f, SR, 0.5)) for f in (440, 880)]
    ours = [mfcc(s)[5] for s in specs]
    ref = [mfcc_oracle(s.magnitudes[5] ** 2, SR, 2048) for s in specs]
    for a, b in zip(ours, ref):
        np.testing.assert_allclose(a, b, atol=1e-8)
    assert np.linalg.norm(ref[0] - ref[1]) > 1.0
    assert np.linalg.norm(ours[0] - ours[1]) > 1.0


def test_mfcc_matches_librosa_pipeline():
    librosa = pytest.importorskip("librosa")
    x = np.random.default_rng(1).standard_normal(6000)
    S = np.abs(librosa.stft(x, n_fft=2048, hop_length=512, pad_mode="reflect")) ** 2
    mel = librosa.filters.mel(sr=SR, n_fft=2048, n_mels=128, dtype=np.float64) @ S
    ref = librosa.feature.mfcc(S=np.log(np.maximum(mel, 1e-10)), n_mfcc=13, dct_type=2, norm="ortho").T
    np.testing.assert_allclose(mfcc(stft(x)), ref, atol=1e-7)


# --- chroma -----------------------------------------------------------------

def brute_force_class(freq):
    """Nearest equal-tempered note by exhaustive search over MIDI 0..127."""
    best = min(range(128), key=lambda m: abs(440.0 * 2 ** ((m - 69) / 12) - freq) / (440.0 * 2 ** ((m - 69) / 12)))
    return best % 12


def test_chroma_440_is_A():
    ch = chroma(stft(tone(440, SR, 1.0)))
    assert ch.shape[1] == 12
    assert np.all(ch[2:-2].argmax(axis=1) == 9)


def test_chroma_bin_map_matches_brute_force():
    m = chroma_bin_map(2048, SR)
    freqs = np.arange(1025) * SR / 2048
    for b in range(0, 1025, 7):
        col = m[:, b]
        if freqs[b] < 32.70319566257483:
            assert np.all(col == 0)
        else:
            # log-distance nearest note == multiplicative nearest for nearby notes
            assert col.argmax() == brute_force_class(freqs[b]) or abs(
                12 * np.log2(freqs[b] / 440) - round(12 * np.log2(freqs[b] / 440))) > 0.49
    np.testing.assert_allclose(m.sum(axis=1), 1.0)


def test_chroma_zero_and_nonnegative():
    assert np.all(chroma(stft(np.zeros(4096))) == 0)
    x = np.random.default_rng(2).standard_normal(4096)
    assert np.all(chroma(stft(x)) >= 0)


@given(st.floats(1e-3, 1e3))
def test_chroma_scales_linearly(a):
    x = tone(440, SR, 0.2) + 0.3 * tone(660, SR, 0.2)
    c1, c2 = chroma(stft(x)), chroma(stft(a * x))
    np.testing.assert_allclose(c2, a * c1, rtol=1e-9, atol=1e-12)
    assert np.array_equal(c1.argmax(axis=1), c2.argmax(axis=1))


# --- spectral contrast --------------------------------------------------

def test_flat_spectrum_has_zero_contrast():
    sc = spectral_contrast(flat_spec())
    assert sc.shape == (3, 7)
    np.testing.assert_array_equal(sc, 0.0)


def test_band_edges_partition_bins():
    ranges = band_edges(2048, SR)
    assert len(ranges) == 7 and ranges[0][0] == 0 and ranges[-1][1] == 1025
    assert all(a[1] == b[0] for a, b in zip(ranges, ranges[1:]))
    with pytest.raises(InvalidParams):
        band_edges(2048, 8000, n_bands=6)


def oracle_contrast(mags, ranges, q=0.02, eps=1e-10):
    out = []
    for lo, hi in ranges:
        band = sorted(mags[lo:hi])
        k = max(1, int(np.rint(q * (hi - lo))))
        out.append(np.log(eps + np.mean(band[-k:])) - np.log(eps + np.mean(band[:k])))
    return np.array(out)


def test_contrast_matches_sort_oracle_and_sine_beats_noise():
    rng = np.random.default_rng(5)
    sine = stft(tone(1000, SR, 0.5))
    noise = stft(rng.standard_normal(int(0.5 * SR)))
    ranges = band_edges(2048, SR)
    for spec in (sine, noise):
        sc = spectral_contrast(spec)
        for t in (3, 5):
            np.testing.assert_allclose(sc[t], oracle_contrast(spec.magnitudes[t], ranges), rtol=1e-12)
    band = next(i for i, (lo, hi) in enumerate(ranges) if lo <= 93 < hi)
    assert spectral_contrast(sine)[2:-2, band].mean() > spectral_contrast(noise)[2:-2, band].mean()


@given(st.floats(1e-2, 1e4))
def test_contrast_gain_invariant(a):
    mags = np.random.default_rng(9).uniform(0.5, 2.0, (4, 1025))
    s1 = Spectrogram(mags, 2048, 512, SR)
    s2 = Spectrogram(a * mags, 2048, 512, SR)
    sc = spectral_contrast(s1)
    assert np.all(sc >= 0)
    np.testing.assert_allclose(spectral_contrast(s2), sc, atol=1e-6)


# --- aggregation / vectors / cache ----------------------------------------

def test_aggregate_frames():
    np.testing.assert_array_equal(aggregate_frames([[1.0, 2.0]]), [1.0, 2.0])
    np.testing.assert_array_equal(aggregate_frames([[1.0], [3.0]]), [2.0])
    with pytest.raises(EmptyInput):
        aggregate_frames(np.zeros((0, 3)))


@given(st.integers(0, 2 ** 31 - 1))
def test_aggregate_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    f = rng.standard_normal((7, 4))
    np.testing.assert_allclose(aggregate_frames(f[rng.permutation(7)]), aggregate_frames(f), atol=1e-14)


def segment(seed=0, n=8000):
    x = np.random.default_rng(seed).uniform(0, 1, n)
    return CoughSegment(x, 0.0, n / SR, parent_id=f"p{seed}", label="positive", dataset="Virufy")


@pytest.mark.parametrize("kind,dim", [("mfcc", 13), ("chroma", 12), ("contrast", 7), ("combined", 32)])
def test_vector_lengths(kind, dim):
    v = extract_feature_set(segment(), kind)
    assert len(v.values) == dim and v.kind is FeatureKind.parse(kind)
    assert v.label == "positive" and v.dataset == "Virufy" and v.group == "p0"


def test_combined_is_concatenation_and_frame_counts_agree():
    seg = segment(1)
    parts = {k: extract_feature_set(seg, k).values for k in ("mfcc", "chroma", "contrast")}
    comb = extract_feature_set(seg, "combined").values
    np.testing.assert_array_equal(comb, np.concatenate([parts["mfcc"], parts["chroma"], parts["contrast"]]))
    split = split_combined(comb)
    np.testing.assert_array_equal(split[FeatureKind.CHROMA], parts["chroma"])
    counts = {k: frame_features(seg.samples, k).shape[0] for k in ("mfcc", "chroma", "contrast")}
    assert len(set(counts.values())) == 1


def test_extraction_is_bit_deterministic():
    a = extract_feature_set(segment(2), "combined").values
    b = extract_feature_set(segment(2), "combined").values
    assert a.tobytes() == b.tobytes()


def test_feature_vector_validation():
    with pytest.raises(NonFiniteInput):
        FeatureVector(np.array([1.0, np.nan]), "mfcc")
    with pytest.raises(DimensionMismatch):
        FeatureVector(np.zeros((2, 2)), "mfcc")
    with pytest.raises(ValueError):
        FeatureKind.parse("mfccx")


def test_feature_cache_round_trip_is_exact(tmp_path):
    vecs = [extract_feature_set(segment(s), "combined") for s in range(5)]
    rng = np.random.default_rng(0)
    vecs.append(FeatureVector(rng.standard_normal(32) * 10.0 ** rng.integers(-300, 300, 32), "combined",
                              "odd#0", "negative", "COUGHVID", "odd"))
    path = tmp_path / "c.csv"
    write_feature_cache(path, vecs)
    back = read_feature_cache(path)
    for a, b in zip(vecs, back):
        assert a.values.tobytes() == b.values.tobytes()
        assert (a.segment_ref, a.label, a.dataset, a.group, a.kind) == (b.segment_ref, b.label, b.dataset, b.group, b.kind)
