"""WAV decoding/encoding and band-limited resampling.

Everything here is a pure function over immutable inputs. Decoded samples are
float64 in [-1, 1], averaged down to mono.
"""
from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from functools import lru_cache
from math import gcd
from pathlib import Path

import numpy as np

from .errors import EmptyAudio, InvalidRate, MalformedContainer, UnsupportedEncoding

CANONICAL_RATE = 22050

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

# Kaiser-windowed sinc: beta, zero crossings per side, passband rolloff.
KAISER_BETA = 14.769656459379492
NUM_ZEROS = 64
ROLLOFF = 0.9475937167399596


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray
    sample_rate: int
    source_id: str = ""

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise InvalidRate(f"sample_rate must be positive, got {self.sample_rate}")
        samples = np.asarray(self.samples, dtype=np.float64)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def _parse_chunks(data: bytes):
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedContainer("missing RIFF/WAVE header")
    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack("<I", data[pos + 4:pos + 8])
        body = data[pos + 8:pos + 8 + size]
        if cid == b"fmt ":
            if len(body) < 16:
                raise MalformedContainer("fmt chunk too short")
            fmt = body
        elif cid == b"data":
            # Tolerate writers that leave a bogus size on a streamed data chunk.
            payload = body
        pos += 8 + size + (size & 1)
    if fmt is None:
        raise MalformedContainer("no fmt chunk")
    if payload is None:
        raise MalformedContainer("no data chunk")
    return fmt, payload


def decode_wav(data: bytes, source_id: str = "") -> AudioClip:
    """Decode a RIFF/WAVE byte string into a mono :class:`AudioClip`.

    Supports integer PCM at 8/16/24/32 bits and IEEE float at 32/64 bits.
    Integer samples are divided by ``2**(bits-1)``; multichannel frames are
    averaged sample-wise.
    """
    fmt, payload = _parse_chunks(bytes(data))
    tag, channels, rate, _, block_align, bits = struct.unpack("<HHIIHH", fmt[:16])
    if tag == WAVE_FORMAT_EXTENSIBLE:
        if len(fmt) < 26:
            raise MalformedContainer("truncated WAVE_FORMAT_EXTENSIBLE header")
        (tag,) = struct.unpack("<H", fmt[24:26])
    if channels < 1 or rate < 1:
        raise MalformedContainer(f"bad fmt fields: channels={channels} rate={rate}")

    if tag == WAVE_FORMAT_PCM and bits in (8, 16, 24, 32):
        width = bits // 8
    elif tag == WAVE_FORMAT_IEEE_FLOAT and bits in (32, 64):
        width = bits // 8
    else:
        raise UnsupportedEncoding(f"format tag 0x{tag:04x} with {bits} bits")
    if block_align != width * channels:
        raise MalformedContainer(f"block_align {block_align} inconsistent with {channels}x{bits} bits")

    n_frames = len(payload) // block_align
    if n_frames == 0:
        raise EmptyAudio("data chunk holds zero frames")
    raw = payload[: n_frames * block_align]

    if tag == WAVE_FORMAT_IEEE_FLOAT:
        x = np.frombuffer(raw, dtype="<f4" if bits == 32 else "<f8").astype(np.float64)
    elif bits == 8:
        x = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    elif bits == 16:
        x = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    elif bits == 24:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        ints = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        ints = np.where(ints & 0x800000, ints - 0x1000000, ints)
        x = ints.astype(np.float64) / 8388608.0
    else:
        x = np.frombuffer(raw, dtype="<i4").astype(np.float64) / 2147483648.0

    x = x.reshape(n_frames, channels).mean(axis=1)
    x = np.nan_to_num(x, nan=0.0, posinf=1.0, neginf=-1.0)
    return AudioClip(x, int(rate), source_id)


def encode_wav(clip: AudioClip, subtype: str = "PCM_16") -> bytes:
    """Serialize a mono clip. ``subtype`` is ``"PCM_16"`` or ``"FLOAT"`` (32-bit)."""
    x = np.asarray(clip.samples, dtype=np.float64)
    if subtype == "PCM_16":
        q = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2")
        tag, bits = WAVE_FORMAT_PCM, 16
    elif subtype == "FLOAT":
        q = x.astype("<f4")
        tag, bits = WAVE_FORMAT_IEEE_FLOAT, 32
    else:
        raise UnsupportedEncoding(f"cannot encode subtype {subtype!r}")
    body = q.tobytes()
    width = bits // 8
    buf = io.BytesIO()
    buf.write(b"RIFF")
    buf.write(struct.pack("<I", 4 + 8 + 16 + 8 + len(body)))
    buf.write(b"WAVE")
    buf.write(b"fmt ")
    buf.write(struct.pack("<IHHIIHH", 16, tag, 1, clip.sample_rate,
                          clip.sample_rate * width, width, bits))
    buf.write(b"data")
    buf.write(struct.pack("<I", len(body)))
    buf.write(body)
    return buf.getvalue()


def read_wav(path, source_id: str | None = None) -> AudioClip:
    path = Path(path)
    return decode_wav(path.read_bytes(), source_id=str(path) if source_id is None else source_id)


def write_wav(path, clip: AudioClip, subtype: str = "PCM_16") -> None:
    Path(path).write_bytes(encode_wav(clip, subtype))


@lru_cache(maxsize=32)
def _polyphase_table(up: int, down: int):
    """Filter taps for each of the ``up`` output phases.

    Row ``p`` holds the taps applied to input samples ``base - half + 1 ..
    base + half`` for an output whose fractional input position is ``p/up``.
    """
    cutoff = ROLLOFF * min(1.0, up / down)
    half = int(np.ceil(NUM_ZEROS / cutoff))
    offsets = np.arange(-half + 1, half + 1)
    frac = np.arange(up)[:, None] / up
    t = offsets[None, :] - frac
    # Evaluate the continuous Kaiser window at arbitrary t in [-half, half].
    arg = np.clip(1.0 - (t / half) ** 2, 0.0, None)
    w = np.i0(KAISER_BETA * np.sqrt(arg)) / np.i0(KAISER_BETA)
    taps = cutoff * np.sinc(cutoff * t) * w
    taps.setflags(write=False)
    return half, taps


def resample(clip: AudioClip, target_rate: int = CANONICAL_RATE, chunk: int = 8192) -> AudioClip:
    """Band-limited resampling with a Kaiser-windowed sinc polyphase filter.

    Output length is ``round(len(x) * target / source)``. Content above the
    lower of the two Nyquist frequencies is suppressed.
    """
    if target_rate is None or int(target_rate) <= 0:
        raise InvalidRate(f"target_rate must be positive, got {target_rate}")
    target_rate = int(target_rate)
    if target_rate == clip.sample_rate:
        return clip
    g = gcd(target_rate, clip.sample_rate)
    up, down = target_rate // g, clip.sample_rate // g
    half, taps = _polyphase_table(up, down)

    x = np.asarray(clip.samples, dtype=np.float64)
    n_in = len(x)
    n_out = int(round(n_in * target_rate / clip.sample_rate))
    padded = np.concatenate([np.zeros(half), x, np.zeros(half + 1)])
    offsets = np.arange(-half + 1, half + 1)

    out = np.empty(n_out)
    for start in range(0, n_out, chunk):
        n = np.arange(start, min(start + chunk, n_out))
        pos = n * down
        base = pos // up
        phase = pos % up
        idx = base[:, None] + offsets[None, :] + half
        out[start:start + len(n)] = np.einsum("ij,ij->i", padded[idx], taps[phase])
    return AudioClip(out, target_rate, clip.source_id)


def canonicalize(clip: AudioClip, rate: int = CANONICAL_RATE) -> AudioClip:
    return resample(clip, rate)
