"""Spectral and energy descriptors: MFCC (+ deltas), zero-crossing rate, intensity."""

from __future__ import annotations

import numpy as np
from scipy.fft import dct

from ..errors import InsufficientFramesError
from .framing import FrameTrack, frame_signal

FRAME_MS = 25.0
HOP_MS = 10.0
PRE_EMPHASIS = 0.97
N_MEL = 26
N_MFCC = 13
LOG_FLOOR = 1e-10
DELTA_WINDOW = 2
# intensity of an all-zero frame
INTENSITY_FLOOR_DB = -100.0


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=float) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=float) / 2595.0) - 1.0)


def mel_filterbank(n_filters: int, n_fft: int, sample_rate: int) -> np.ndarray:
    """Triangular filters equally spaced on the mel scale from 0 Hz to Nyquist."""
    mel_points = np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_filters + 2)
    bins = np.floor((n_fft + 1) * mel_to_hz(mel_points) / sample_rate).astype(int)
    fbank = np.zeros((n_filters, n_fft // 2 + 1))
    for j in range(n_filters):
        lo, mid, hi = bins[j], bins[j + 1], bins[j + 2]
        for k in range(lo, mid):
            fbank[j, k] = (k - lo) / (mid - lo)
        for k in range(mid, hi):
            fbank[j, k] = (hi - k) / (hi - mid)
    return fbank


def mfcc_matrix(clip, n_mfcc: int = N_MFCC, n_mel: int = N_MEL) -> np.ndarray:
    """MFCCs as an ``(n_frames, n_mfcc)`` array."""
    x = np.asarray(clip.samples, dtype=float)
    emphasized = np.append(x[0], x[1:] - PRE_EMPHASIS * x[:-1])
    frames = frame_signal(clip.__class__(emphasized, clip.sample_rate, clip.id),
                          FRAME_MS, HOP_MS, window="hann")
    n_fft = 1 << int(np.ceil(np.log2(frames.shape[1])))
    power = np.abs(np.fft.rfft(frames, n=n_fft, axis=1)) ** 2 / n_fft
    energies = power @ mel_filterbank(n_mel, n_fft, clip.sample_rate).T
    log_e = np.log(np.maximum(energies, LOG_FLOOR))
    return dct(log_e, type=2, axis=1, norm="ortho")[:, :n_mfcc]


def mfcc_track(clip) -> list[FrameTrack]:
    """MFCC 0-12 as thirteen FrameTracks."""
    m = mfcc_matrix(clip)
    return [FrameTrack(m[:, i].copy(), HOP_MS, FRAME_MS, f"MFCC{i}") for i in range(m.shape[1])]


def delta_values(values: np.ndarray, width: int = DELTA_WINDOW) -> np.ndarray:
    n = len(values)
    if n < 2 * width + 1:
        raise InsufficientFramesError(f"delta needs >= {2 * width + 1} frames, got {n}")
    padded = np.pad(values, width, mode="edge")
    denom = 2.0 * sum(k * k for k in range(1, width + 1))
    out = np.zeros(n)
    for k in range(1, width + 1):
        out += k * (padded[width + k:width + k + n] - padded[width - k:width - k + n])
    return out / denom


def delta_track(track: FrameTrack, order: int = 1) -> FrameTrack:
    """Regression delta over +-2 frames; ``order=2`` is the delta of the delta."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    values = delta_values(track.values)
    if order == 2:
        values = delta_values(values)
    prefix = "d" * order
    return FrameTrack(values, track.frame_hop_ms, track.frame_len_ms, prefix + track.descriptor_name)


def zcr_track(clip) -> FrameTrack:
    """Sign changes per sample in each rectangular frame."""
    frames = frame_signal(clip, FRAME_MS, HOP_MS)
    positive = frames >= 0
    crossings = np.count_nonzero(positive[:, 1:] != positive[:, :-1], axis=1)
    return FrameTrack(crossings / frames.shape[1], HOP_MS, FRAME_MS, "ZCR")


def intensity_track(clip) -> FrameTrack:
    """Frame RMS in dB relative to full scale."""
    frames = frame_signal(clip, FRAME_MS, HOP_MS)
    rms = np.sqrt(np.mean(frames * frames, axis=1))
    floor = 10 ** (INTENSITY_FLOOR_DB / 20)
    return FrameTrack(20.0 * np.log10(np.maximum(rms, floor)), HOP_MS, FRAME_MS, "intensity")
