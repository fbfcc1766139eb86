"""Canonical audio representation, WAV I/O, resampling, and signal statistics.

Everything downstream works on :class:`AudioBuffer`: mono float64 samples in
[-1, 1] plus a sample rate. The canonical pipeline format is mono 16 kHz
16-bit PCM; ingest downmixes and rescales into it.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AudioReadError, EmptyAudioError, UnsupportedCodecError

CANONICAL_RATE = 16000

# int16 <-> float divisor. Symmetric on write and read so the round trip
# stays within 1/32768 per sample (an asymmetric 32767 write scale would not).
PCM_SCALE = 32768

DEFAULT_SILENCE_THRESHOLD = 0.001
NOISE_FLOOR_WINDOW_MS = 20
NOISE_FLOOR_DECILE = 0.1


@dataclass(frozen=True)
class AudioBuffer:
    """Immutable mono audio: float64 samples plus sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"samples must be one-dimensional, got shape {arr.shape}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return len(self.samples)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AudioBuffer):
            return NotImplemented
        return self.sample_rate == other.sample_rate and np.array_equal(
            self.samples, other.samples
        )

    @property
    def duration_ms(self) -> int:
        return int(round(1000 * len(self.samples) / self.sample_rate))


@dataclass(frozen=True)
class SignalProfile:
    """Numeric summary of a signal: the features separating clean synthetic
    audio (no noise floor, zero leading silence) from field recordings."""

    duration_ms: int
    rms: float
    peak: float
    leading_silence_ms: int
    noise_floor: float

    def as_dict(self) -> dict:
        return {
            "duration_ms": self.duration_ms,
            "rms": self.rms,
            "peak": self.peak,
            "leading_silence_ms": self.leading_silence_ms,
            "noise_floor": self.noise_floor,
        }


def _parse_wav_chunks(data: bytes, origin: str):
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise AudioReadError(f"{origin}: not a RIFF/WAVE file")
    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (size,) = struct.unpack("<I", data[pos + 4 : pos + 8])
        body = data[pos + 8 : pos + 8 + size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise AudioReadError(f"{origin}: truncated fmt chunk")
            fmt = struct.unpack("<HHIIHH", body[:16])
        elif chunk_id == b"data":
            payload = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    if fmt is None or payload is None:
        raise AudioReadError(f"{origin}: missing fmt or data chunk")
    return fmt, payload


def decode_wav_bytes(data: bytes, origin: str = "<bytes>") -> AudioBuffer:
    """Decode an in-memory RIFF/WAVE payload (16-bit PCM or 32-bit float).

    Stereo is downmixed by channel averaging; integer PCM is scaled into
    [-1, 1] by dividing by 32768; float samples are clipped into [-1, 1].
    """
    fmt, payload = _parse_wav_chunks(data, origin)
    audio_format, channels, sample_rate, _, _, bits = fmt
    if channels < 1 or sample_rate <= 0:
        raise AudioReadError(f"{origin}: invalid fmt chunk")
    if audio_format == 1 and bits == 16:
        raw = np.frombuffer(payload[: len(payload) // 2 * 2], dtype="<i2")
        samples = raw.astype(np.float64) / PCM_SCALE
    elif audio_format == 3 and bits == 32:
        raw = np.frombuffer(payload[: len(payload) // 4 * 4], dtype="<f4")
        samples = np.clip(raw.astype(np.float64), -1.0, 1.0)
    else:
        raise UnsupportedCodecError(
            f"{origin}: unsupported codec (format={audio_format}, bits={bits}); "
            "only 16-bit PCM and 32-bit float are accepted"
        )
    if channels > 1:
        usable = len(samples) // channels * channels
        samples = samples[:usable].reshape(-1, channels).mean(axis=1)
    if samples.size == 0:
        raise EmptyAudioError(f"{origin}: zero-length audio")
    return AudioBuffer(samples, sample_rate)


def load_wav(path) -> AudioBuffer:
    """Load a WAV file into a mono AudioBuffer.

    Raises AudioReadError for unreadable or non-WAVE files,
    UnsupportedCodecError for codecs other than PCM16/float32, and
    EmptyAudioError for files with no samples.
    """
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise AudioReadError(f"cannot read {path}: {exc}") from exc
    return decode_wav_bytes(data, origin=str(path))


def encode_wav_bytes(buffer: AudioBuffer) -> bytes:
    """Serialize a buffer as mono 16-bit PCM WAV bytes (samples clamped)."""
    if len(buffer) == 0:
        raise EmptyAudioError("refusing to encode an empty buffer")
    clipped = np.clip(buffer.samples, -1.0, 1.0)
    pcm = np.clip(np.rint(clipped * PCM_SCALE), -32768, 32767).astype("<i2")
    payload = pcm.tobytes()
    rate = buffer.sample_rate
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, rate, rate * 2, 2, 16)
    header += b"data" + struct.pack("<I", len(payload))
    return header + payload


def save_wav(buffer: AudioBuffer, path) -> None:
    """Write a buffer as mono 16-bit PCM at the buffer's sample rate."""
    Path(path).write_bytes(encode_wav_bytes(buffer))


def resample(buffer: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Resample with a linear-interpolation kernel; no-op when rates match.

    Output length is round(len * target / source), clamped to at least one
    sample for non-empty input.
    """
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate == buffer.sample_rate:
        return buffer
    n_in = len(buffer)
    if n_in == 0:
        return AudioBuffer(np.zeros(0), target_rate)
    n_out = max(1, int(round(n_in * target_rate / buffer.sample_rate)))
    positions = np.arange(n_out) * (buffer.sample_rate / target_rate)
    out = np.interp(positions, np.arange(n_in), buffer.samples)
    return AudioBuffer(out, target_rate)


def _window_mean_squares(samples: np.ndarray, window: int):
    """Per-window (sum of squares, length) pairs; the trailing partial window
    is scored over its actual length."""
    squares = samples * samples
    n_full = len(samples) // window
    out = []
    for i in range(n_full):
        out.append((float(squares[i * window : (i + 1) * window].sum()), window))
    tail = len(samples) - n_full * window
    if tail:
        out.append((float(squares[n_full * window :].sum()), tail))
    return out


def noise_floor(buffer: AudioBuffer) -> float:
    """RMS of the quietest decile of 20 ms windows.

    Robust to speech content: speech occupies the louder windows, so the
    quietest tenth tracks the background level.
    """
    window = max(1, buffer.sample_rate * NOISE_FLOOR_WINDOW_MS // 1000)
    stats = _window_mean_squares(buffer.samples, window)
    stats.sort(key=lambda item: item[0] / item[1])
    keep = max(1, int(len(stats) * NOISE_FLOOR_DECILE))
    total_sq = sum(s for s, _ in stats[:keep])
    total_len = sum(l for _, l in stats[:keep])
    return float(np.sqrt(total_sq / total_len))


def profile(
    buffer: AudioBuffer, silence_threshold: float = DEFAULT_SILENCE_THRESHOLD
) -> SignalProfile:
    """Compute the signal statistics used to compare authentic and synthetic
    audio: overall/peak level, onset delay, and background noise level.

    leading_silence_ms is the time before the first sample whose magnitude
    reaches ``silence_threshold`` (the full duration if none does).
    """
    if len(buffer) == 0:
        raise EmptyAudioError("cannot profile an empty buffer")
    samples = buffer.samples
    magnitudes = np.abs(samples)
    rms = float(np.sqrt(np.mean(samples * samples)))
    peak = float(magnitudes.max())
    loud = np.nonzero(magnitudes >= silence_threshold)[0]
    if loud.size:
        leading = int(round(1000 * int(loud[0]) / buffer.sample_rate))
    else:
        leading = buffer.duration_ms
    return SignalProfile(
        duration_ms=buffer.duration_ms,
        rms=rms,
        peak=peak,
        leading_silence_ms=leading,
        noise_floor=noise_floor(buffer),
    )
