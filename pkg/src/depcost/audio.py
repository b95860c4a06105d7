"""WAV I/O, loudness normalization and log-MMSE spectral enhancement."""

from __future__ import annotations

import os
import struct
import wave
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    CannotNormalizeError,
    EmptyInputError,
    InsufficientAudioError,
    UnsupportedFormatError,
    WavDecodeError,
)
from .special import exp1

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

# a priori SNR floor of the decision-directed estimator (-25 dB)
XI_MIN = 10 ** (-25 / 10)
# cap on the a posteriori SNR to keep E1 arguments in range
GAMMA_MAX = 40.0


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray
    sample_rate: int
    id: str = ""
    clipped: bool = False

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def rms(self) -> float:
        return float(np.sqrt(np.mean(np.square(self.samples))))


@dataclass(frozen=True)
class EnhancementConfig:
    frame_ms: float = 32.0
    overlap_fraction: float = 0.5
    noise_frames: int = 6
    ddir_alpha: float = 0.98
    gain_floor: float = 0.1

    def __post_init__(self):
        if self.frame_ms <= 0:
            raise ValueError("frame_ms must be positive")
        if not 0 < self.overlap_fraction < 1:
            raise ValueError("overlap_fraction must lie in (0, 1)")
        if self.noise_frames < 1:
            raise ValueError("noise_frames must be >= 1")
        if not 0 < self.ddir_alpha < 1:
            raise ValueError("ddir_alpha must lie in (0, 1)")
        if not 0 < self.gain_floor < 1:
            raise ValueError("gain_floor must lie in (0, 1)")


def _parse_fmt(body: bytes):
    if len(body) < 16:
        raise WavDecodeError("fmt chunk too short")
    fmt_tag, channels, rate, _, block_align, bits = struct.unpack("<HHIIHH", body[:16])
    if fmt_tag == WAVE_FORMAT_EXTENSIBLE:
        if len(body) < 40:
            raise WavDecodeError("extensible fmt chunk too short")
        fmt_tag = struct.unpack("<H", body[24:26])[0]
    return fmt_tag, channels, rate, block_align, bits


def load_wav(path, clip_id: str | None = None) -> AudioClip:
    """Read a RIFF/WAVE file holding PCM16 or float32 samples.

    Stereo (or wider) input is downmixed by averaging channels.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise WavDecodeError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        ck_id = raw[pos:pos + 4]
        (ck_size,) = struct.unpack("<I", raw[pos + 4:pos + 8])
        body = raw[pos + 8:pos + 8 + ck_size]
        if len(body) < ck_size and ck_id != b"data":
            raise WavDecodeError(f"{path}: truncated {ck_id!r} chunk")
        if ck_id == b"fmt ":
            fmt = _parse_fmt(body)
        elif ck_id == b"data":
            data = body
            break
        pos += 8 + ck_size + (ck_size & 1)
    if fmt is None or data is None:
        raise WavDecodeError(f"{path}: missing fmt or data chunk")

    fmt_tag, channels, rate, block_align, bits = fmt
    if channels < 1 or rate <= 0:
        raise WavDecodeError(f"{path}: invalid channel count or sample rate")
    if fmt_tag == WAVE_FORMAT_PCM and bits == 16:
        dtype, scale = np.dtype("<i2"), 1.0 / 32768.0
    elif fmt_tag == WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        dtype, scale = np.dtype("<f4"), 1.0
    else:
        raise UnsupportedFormatError(f"{path}: format tag {fmt_tag} with {bits} bits is not supported")

    frame_bytes = dtype.itemsize * channels
    n_frames = len(data) // frame_bytes
    if n_frames == 0:
        raise EmptyInputError(f"{path}: no audio samples")
    pcm = np.frombuffer(data[:n_frames * frame_bytes], dtype=dtype).astype(np.float64)
    pcm = pcm.reshape(n_frames, channels).mean(axis=1) * scale
    if clip_id is None:
        clip_id = os.path.splitext(os.path.basename(str(path)))[0]
    return AudioClip(samples=pcm, sample_rate=int(rate), id=clip_id)


def write_wav(path, clip: AudioClip) -> None:
    """Write ``clip`` as mono PCM16 (samples outside [-1, 1] are clipped)."""
    pcm = np.clip(np.round(clip.samples * 32768.0), -32768, 32767).astype("<i2")
    tmp = f"{path}.tmp"
    with wave.open(tmp, "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(clip.sample_rate)
        wf.writeframes(pcm.tobytes())
    os.replace(tmp, path)


def normalize_dbfs(clip: AudioClip, target_dbfs: float = -20.0) -> AudioClip:
    """Scale ``clip`` so its RMS sits at ``target_dbfs`` relative to full scale.

    If the gain would push samples past full scale they are peak-limited to
    [-1, 1] and the returned clip has ``clipped=True``.
    """
    if len(clip.samples) == 0:
        raise EmptyInputError("cannot normalize an empty clip")
    rms = clip.rms()
    if not rms > 0:
        raise CannotNormalizeError("signal has zero energy")
    target = 10.0 ** (target_dbfs / 20.0)
    scaled = clip.samples * (target / rms)
    clipped = bool(np.max(np.abs(scaled)) > 1.0)
    if clipped:
        scaled = np.clip(scaled, -1.0, 1.0)
    return replace(clip, samples=scaled, clipped=clipped)


@dataclass
class _Stft:
    frame_len: int
    hop: int
    window: np.ndarray
    pad_front: int
    n_frames: int
    padded_len: int


def _stft_plan(n: int, sample_rate: int, cfg: EnhancementConfig) -> _Stft:
    frame_len = int(round(cfg.frame_ms * sample_rate / 1000.0))
    frame_len += frame_len % 2
    hop = max(1, int(round(frame_len * (1.0 - cfg.overlap_fraction))))
    # sqrt of a periodic Hann: analysis x synthesis product is the Hann window
    window = np.sqrt(0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(frame_len) / frame_len))
    pad_front = frame_len
    n_frames = int(np.ceil((n + pad_front) / hop)) + 1
    padded_len = (n_frames - 1) * hop + frame_len
    return _Stft(frame_len, hop, window, pad_front, n_frames, padded_len)


def logmmse_gain(xi, gamma):
    """Log-spectral amplitude gain for a priori SNR ``xi`` and a posteriori SNR ``gamma``."""
    ratio = xi / (1.0 + xi)
    v = np.maximum(ratio * gamma, 1e-12)
    return ratio * np.exp(0.5 * exp1(v))


def logmmse_enhance(clip: AudioClip, cfg: EnhancementConfig | None = None,
                    return_gains: bool = False, force_unity: bool = False):
    """Suppress stationary background noise with the log-MMSE amplitude estimator.

    The noise power spectrum is the average of the first ``cfg.noise_frames``
    non-overlapping windowed frames, and the a priori SNR follows the
    decision-directed rule. Gains are clamped to ``[gain_floor, 1]``.

    ``force_unity`` bypasses the estimator (all gains 1), which reduces the
    routine to analysis/overlap-add resynthesis.
    """
    cfg = cfg or EnhancementConfig()
    x = np.asarray(clip.samples, dtype=float)
    n = len(x)
    plan = _stft_plan(n, clip.sample_rate, cfg)
    L, H, w = plan.frame_len, plan.hop, plan.window
    if n < cfg.noise_frames * L:
        raise InsufficientAudioError(
            f"need {cfg.noise_frames * L} samples for the noise estimate, got {n}")

    lead = x[:cfg.noise_frames * L].reshape(cfg.noise_frames, L) * w
    noise_psd = np.mean(np.abs(np.fft.rfft(lead, axis=1)) ** 2, axis=0)
    noise_psd = np.maximum(noise_psd, 1e-20)

    padded = np.zeros(plan.padded_len)
    padded[plan.pad_front:plan.pad_front + n] = x
    idx = np.arange(L)[None, :] + H * np.arange(plan.n_frames)[:, None]
    spectra = np.fft.rfft(padded[idx] * w, axis=1)
    power = np.abs(spectra) ** 2

    gains = np.ones_like(power)
    if not force_unity:
        prev_clean = None
        for t in range(plan.n_frames):
            gamma = np.minimum(power[t] / noise_psd, GAMMA_MAX)
            if prev_clean is None:
                xi = cfg.ddir_alpha + (1 - cfg.ddir_alpha) * np.maximum(gamma - 1.0, 0.0)
            else:
                xi = (cfg.ddir_alpha * prev_clean / noise_psd
                      + (1 - cfg.ddir_alpha) * np.maximum(gamma - 1.0, 0.0))
            xi = np.maximum(xi, XI_MIN)
            g = np.clip(logmmse_gain(xi, gamma), cfg.gain_floor, 1.0)
            gains[t] = g
            prev_clean = g * g * power[t]

    frames = np.fft.irfft(spectra * gains, n=L, axis=1) * w
    out = np.zeros(plan.padded_len)
    norm = np.zeros(plan.padded_len)
    np.add.at(out, idx, frames)
    np.add.at(norm, idx, np.broadcast_to(w * w, idx.shape))
    region = slice(plan.pad_front, plan.pad_front + n)
    y = out[region] / norm[region]
    result = replace(clip, samples=y)
    if return_gains:
        return result, gains
    return result


def preprocess_clip(clip: AudioClip, target_dbfs: float = -20.0, enhance: bool = True,
                    cfg: EnhancementConfig | None = None, order: str = "normalize_first") -> AudioClip:
    """Apply loudness normalization and (optionally) enhancement in the configured order."""
    if order not in ("normalize_first", "enhance_first"):
        raise ValueError(f"unknown order {order!r}")
    if not enhance:
        return normalize_dbfs(clip, target_dbfs)
    if order == "normalize_first":
        return logmmse_enhance(normalize_dbfs(clip, target_dbfs), cfg)
    return normalize_dbfs(logmmse_enhance(clip, cfg), target_dbfs)
