"""Framing and the frame-level track container."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientAudioError


@dataclass(frozen=True)
class FrameTrack:
    """One low-level descriptor sampled once per frame.

    ``values`` holds NaN where the descriptor is undefined (e.g. F0 on
    unvoiced frames).
    """

    values: np.ndarray
    frame_hop_ms: float
    frame_len_ms: float
    descriptor_name: str

    def __len__(self):
        return len(self.values)

    @property
    def present(self) -> np.ndarray:
        return self.values[~np.isnan(self.values)]


def ms_to_samples(ms: float, sample_rate: int) -> int:
    return int(round(ms * sample_rate / 1000.0))


def frame_count(n: int, frame_len: int, hop: int) -> int:
    if n < frame_len:
        return 0
    return (n - frame_len) // hop + 1


def frame_samples(x: np.ndarray, frame_len: int, hop: int, window: str = "rectangular") -> np.ndarray:
    """Slice ``x`` into ``(n_frames, frame_len)`` frames and apply ``window``."""
    if frame_len <= 0 or hop <= 0 or hop > frame_len:
        raise ValueError("need frame_len >= hop > 0")
    count = frame_count(len(x), frame_len, hop)
    if count == 0:
        raise InsufficientAudioError(f"signal of {len(x)} samples is shorter than one frame ({frame_len})")
    idx = np.arange(frame_len)[None, :] + hop * np.arange(count)[:, None]
    frames = np.asarray(x, dtype=float)[idx]
    if window == "hann":
        frames = frames * np.hanning(frame_len)
    elif window != "rectangular":
        raise ValueError(f"unknown window {window!r}")
    return frames


def frame_signal(clip, frame_ms: float, hop_ms: float, window: str = "rectangular") -> np.ndarray:
    """Frame an AudioClip with sizes given in milliseconds."""
    if not frame_ms >= hop_ms > 0:
        raise ValueError("need frame_ms >= hop_ms > 0")
    return frame_samples(clip.samples, ms_to_samples(frame_ms, clip.sample_rate),
                         ms_to_samples(hop_ms, clip.sample_rate), window)
