import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coughscreen.audio_io import (AudioClip, canonicalize, decode_wav, encode_wav, read_wav,
                                  resample, write_wav)
from coughscreen.errors import EmptyAudio, InvalidRate, MalformedContainer, UnsupportedEncoding
from conftest import tone
from oracles import fft_peak_hz


def riff(fmt_tag, channels, rate, bits, payload, extensible=False):
    width = bits // 8
    fmt = struct.pack("<HHIIHH", 0xFFFE if extensible else fmt_tag, channels, rate,
                      rate * width * channels, width * channels, bits)
    if extensible:
        fmt += struct.pack("<HHIH", 22, bits, 0, fmt_tag) + b"\x00" * 14
    body = b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", len(payload)) + payload
    return b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body


def test_pcm16_scaling():
    clip = decode_wav(riff(1, 1, 8000, 16, np.array([0, 16384, -16384], "<i2").tobytes()))
    np.testing.assert_allclose(clip.samples, [0.0, 0.5, -0.5], atol=1 / 32768)
    assert clip.sample_rate == 8000


def test_stereo_float_is_channel_mean():
    clip = decode_wav(riff(3, 2, 16000, 32, np.array([1.0, 0.0], "<f4").tobytes()))
    np.testing.assert_allclose(clip.samples, [0.5])


def test_pcm8_pcm24_pcm32_and_float64():
    c8 = decode_wav(riff(1, 1, 8000, 8, bytes([128, 192, 64])))
    np.testing.assert_allclose(c8.samples, [0.0, 0.5, -0.5])
    v24 = [0, 1 << 22, -(1 << 22)]
    raw24 = b"".join(int(v & 0xFFFFFF).to_bytes(3, "little") for v in v24)
    np.testing.assert_allclose(decode_wav(riff(1, 1, 8000, 24, raw24)).samples, [0.0, 0.5, -0.5])
    raw32 = np.array([0, 1 << 30, -(1 << 30)], "<i4").tobytes()
    np.testing.assert_allclose(decode_wav(riff(1, 1, 8000, 32, raw32)).samples, [0.0, 0.5, -0.5])
    raw64 = np.array([0.25, -0.75], "<f8").tobytes()
    np.testing.assert_allclose(decode_wav(riff(3, 1, 8000, 64, raw64)).samples, [0.25, -0.75])


def test_extensible_header():
    clip = decode_wav(riff(1, 2, 8000, 16, np.array([100, 300], "<i2").tobytes(), extensible=True))
    np.testing.assert_allclose(clip.samples, [200 / 32768])


def test_error_paths():
    good = riff(1, 1, 8000, 16, np.zeros(4, "<i2").tobytes())
    with pytest.raises(MalformedContainer):
        decode_wav(good[:10])
    with pytest.raises(MalformedContainer):
        decode_wav(b"RIFX" + good[4:])
    with pytest.raises(UnsupportedEncoding):
        decode_wav(riff(0x55, 1, 8000, 16, b"\x00" * 8))  # MPEG layer 3 tag
    with pytest.raises(EmptyAudio):
        decode_wav(riff(1, 1, 8000, 16, b""))


def test_clip_is_immutable():
    clip = AudioClip(np.zeros(4), 8000)
    with pytest.raises(ValueError):
        clip.samples[0] = 1.0


@given(st.lists(st.floats(-1.0, 1.0, allow_nan=False), min_size=1, max_size=400))
def test_pcm16_round_trip_within_one_step(values):
    clip = AudioClip(np.array(values), 22050)
    back = decode_wav(encode_wav(clip))
    assert np.all(np.abs(back.samples - np.clip(clip.samples, -1, 32767 / 32768)) <= 1 / 32768)


@given(st.binary(min_size=0, max_size=64))
def test_decoded_values_bounded(payload):
    for tag, bits in ((1, 8), (1, 16), (1, 24), (1, 32)):
        n = len(payload) - len(payload) % (bits // 8)
        try:
            clip = decode_wav(riff(tag, 1, 8000, bits, payload[:n]))
        except EmptyAudio:
            continue
        assert np.all(np.isfinite(clip.samples))
        assert np.all(np.abs(clip.samples) <= 1 + 1 / 32768)


def test_float_file_round_trip(tmp_path):
    clip = AudioClip(tone(440, 22050, 0.1), 22050, "x")
    write_wav(tmp_path / "a.wav", clip, "FLOAT")
    back = read_wav(tmp_path / "a.wav")
    np.testing.assert_allclose(back.samples, clip.samples, atol=1e-7)
    assert back.source_id.endswith("a.wav")


def test_resample_length_halves():
    out = resample(AudioClip(np.zeros(44100), 44100), 22050)
    assert out.sample_rate == 22050 and len(out.samples) == 22050


@pytest.mark.parametrize("src,n", [(48000, 48000), (16000, 12345), (8000, 7)])
def test_resample_length_rounding(src, n):
    assert len(resample(AudioClip(np.zeros(n), src), 22050).samples) == round(n * 22050 / src)


def test_resample_identity_and_invalid_rate():
    clip = AudioClip(np.arange(10.0), 22050)
    assert canonicalize(clip) is clip
    with pytest.raises(InvalidRate):
        resample(clip, 0)


@pytest.mark.parametrize("src", [44100, 48000, 16000])
def test_tone_keeps_its_frequency(src):
    x = tone(1000, src, 1.0)
    f_in, _ = fft_peak_hz(x, src)
    out = resample(AudioClip(x, src), 22050)
    f_out, bin_hz = fft_peak_hz(out.samples, 22050)
    assert abs(f_in - 1000) <= src / len(x)
    assert abs(f_out - 1000) <= bin_hz


def test_energy_above_target_nyquist_suppressed():
    out = resample(AudioClip(tone(15000, 44100, 1.0), 44100), 22050)
    inner = out.samples[200:-200]
    assert np.sqrt(np.mean(inner ** 2)) < 1e-4


def test_resample_idempotent_at_fixed_rate():
    clip = AudioClip(tone(700, 44100, 0.3), 44100)
    once = resample(clip, 22050)
    np.testing.assert_allclose(resample(once, 22050).samples, once.samples, atol=1e-6)


def test_resample_matches_resampy():
    resampy = pytest.importorskip("resampy")
    x = tone(1234.5, 44100, 0.5) + 0.1 * tone(300, 44100, 0.5)
    ours = resample(AudioClip(x, 44100), 22050).samples
    ref = resampy.resample(x, 44100, 22050, filter="kaiser_best")
    n = min(len(ours), len(ref))
    assert np.max(np.abs(ours[200:n - 200] - ref[200:n - 200])) < 1e-3
