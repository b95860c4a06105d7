"""Voicing-related descriptors: F0, HNR, jitter/shimmer and pause structure."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .framing import FrameTrack, frame_samples, ms_to_samples

PITCH_FRAME_MS = 40.0
PITCH_HOP_MS = 10.0
F0_MIN = 75.0
F0_MAX = 500.0
VOICING_THRESHOLD = 0.45
# penalty per octave of lag, favours the shortest period among near-equal peaks
OCTAVE_COST = 0.05
# frames whose peak is below this fraction of the clip peak are treated as silent
SILENCE_REL_PEAK = 0.03
HNR_R_CLAMP = 1e-6

PAUSE_FRAME_MS = 25.0
PAUSE_HOP_MS = 10.0
SILENCE_DBFS = -40.0
MIN_PAUSE_MS = 250.0

# consecutive-period ratio above which a pair is skipped (Praat's period factor)
MAX_PERIOD_RATIO = 1.3
MAX_AMPLITUDE_RATIO = 1.6


@dataclass(frozen=True)
class PitchAnalysis:
    f0: np.ndarray        # Hz, NaN when unvoiced
    strength: np.ndarray  # interpolated NCCF peak, NaN when unvoiced
    hop: int
    frame_len: int
    sample_rate: int


def _nccf(frames: np.ndarray, lag_lo: int, lag_hi: int) -> np.ndarray:
    """Normalized autocorrelation r(lag) for lags lag_lo..lag_hi inside each frame."""
    n_frames, L = frames.shape
    n_fft = 1 << int(np.ceil(np.log2(2 * L)))
    spec = np.fft.rfft(frames, n=n_fft, axis=1)
    acf = np.fft.irfft(spec * np.conj(spec), n=n_fft, axis=1)[:, :L]
    sq = frames * frames
    csum = np.cumsum(sq, axis=1)
    total = csum[:, -1:]
    lags = np.arange(lag_lo, lag_hi + 1)
    head = csum[:, L - lags - 1]
    tail = total - np.where(lags > 0, csum[:, np.maximum(lags - 1, 0)], 0.0)
    denom = np.sqrt(np.maximum(head * tail, 0.0))
    num = acf[:, lags]
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(denom > 0, num / denom, 0.0)
    return r


def analyze_pitch(clip, voicing_threshold: float = VOICING_THRESHOLD) -> PitchAnalysis:
    """Frame-wise F0 by normalized autocorrelation peak picking.

    Each 40 ms frame is searched for local NCCF maxima with lags in
    [1/F0_MAX, 1/F0_MIN]. The winning candidate maximizes the peak value
    minus a small per-octave lag penalty; frames whose best peak falls below
    ``voicing_threshold`` are unvoiced. Peak lag and height are refined by
    parabolic interpolation.
    """
    sr = clip.sample_rate
    x = np.asarray(clip.samples, dtype=float)
    L = ms_to_samples(PITCH_FRAME_MS, sr)
    H = ms_to_samples(PITCH_HOP_MS, sr)
    lag_min = max(2, int(np.floor(sr / F0_MAX)))
    lag_max = min(L - 2, int(np.ceil(sr / F0_MIN)))
    frames = frame_samples(x, L, H)
    frames = frames - frames.mean(axis=1, keepdims=True)
    n_frames = frames.shape[0]
    r = _nccf(frames, lag_min - 1, lag_max + 1)
    f0 = np.full(n_frames, np.nan)
    strength = np.full(n_frames, np.nan)

    peak = np.max(np.abs(x)) if len(x) else 0.0
    loud = np.max(np.abs(frames), axis=1) > SILENCE_REL_PEAK * peak
    centre = r[:, 1:-1]
    is_max = (centre >= r[:, :-2]) & (centre > r[:, 2:]) & (centre >= voicing_threshold)
    lags = np.arange(lag_min, lag_max + 1)
    score = centre - OCTAVE_COST * np.log2(lags / lag_min)
    score = np.where(is_max, score, -np.inf)
    best = np.argmax(score, axis=1)
    for t in range(n_frames):
        if not loud[t] or not np.isfinite(score[t, best[t]]):
            continue
        j = best[t] + 1
        a, b, c = r[t, j - 1], r[t, j], r[t, j + 1]
        denom = a - 2.0 * b + c
        shift = 0.5 * (a - c) / denom if denom < 0 else 0.0
        shift = float(np.clip(shift, -0.5, 0.5))
        height = b - 0.25 * (a - c) * shift
        f0[t] = sr / (lags[best[t]] + shift)
        strength[t] = min(height, 1.0)
    return PitchAnalysis(f0, strength, H, L, sr)


def f0_track(clip, analysis: PitchAnalysis | None = None) -> FrameTrack:
    pa = analysis or analyze_pitch(clip)
    return FrameTrack(pa.f0.copy(), PITCH_HOP_MS, PITCH_FRAME_MS, "F0")


def hnr_track(clip, analysis: PitchAnalysis | None = None) -> FrameTrack:
    """Harmonic-to-noise ratio 10*log10(r / (1 - r)) on voiced frames."""
    pa = analysis or analyze_pitch(clip)
    r = np.clip(pa.strength, HNR_R_CLAMP, 1.0 - HNR_R_CLAMP)
    return FrameTrack(10.0 * np.log10(r / (1.0 - r)), PITCH_HOP_MS, PITCH_FRAME_MS, "HNR")


@dataclass(frozen=True)
class VoiceQuality:
    jitter_local: float
    shimmer_local: float
    jitter_abs: float
    n_periods: int
    defined: bool


SINC_HALF_WIDTH = 16
SINC_OVERSAMPLE = 16


def _sinc_interp(seg: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Hann-windowed sinc interpolation of ``seg`` at fractional positions ``t``."""
    base = np.floor(t).astype(int)
    offsets = np.arange(-SINC_HALF_WIDTH + 1, SINC_HALF_WIDTH + 1)
    idx = base[:, None] + offsets[None, :]
    d = t[:, None] - idx
    taper = 0.5 + 0.5 * np.cos(np.pi * d / SINC_HALF_WIDTH)
    kernel = np.sinc(d) * np.where(np.abs(d) < SINC_HALF_WIDTH, taper, 0.0)
    vals = seg[np.clip(idx, 0, len(seg) - 1)]
    vals = np.where((idx >= 0) & (idx < len(seg)), vals, 0.0)
    return np.sum(kernel * vals, axis=1)


def _refine_peak(seg: np.ndarray, i: int) -> tuple[float, float]:
    """Sub-sample position and height of the local maximum at sample ``i``."""
    if i <= 0 or i >= len(seg) - 1:
        return float(i), float(seg[i])
    grid = i + np.arange(-SINC_OVERSAMPLE, SINC_OVERSAMPLE + 1) / SINC_OVERSAMPLE
    vals = _sinc_interp(seg, grid)
    j = int(np.argmax(vals))
    if 0 < j < len(vals) - 1:
        a, b, c = vals[j - 1], vals[j], vals[j + 1]
        denom = a - 2.0 * b + c
        if denom < 0:
            shift = float(np.clip(0.5 * (a - c) / denom, -0.5, 0.5))
            return float(grid[j] + shift / SINC_OVERSAMPLE), float(b - 0.25 * (a - c) * shift)
    return float(grid[j]), float(vals[j])


def _next_pulse(seg: np.ndarray, p: int, T: float) -> int | None:
    """Integer position of the cycle following the pulse at ``p``.

    The one-period waveform around ``p`` is cross-correlated with shifts of
    0.7T..1.3T; the best shift predicts the next pulse, which is then snapped
    to the nearest local maximum within +-0.1T of the prediction.
    """
    h = max(2, int(round(T / 2)))
    lo, hi = int(np.ceil(0.7 * T)), int(np.floor(1.3 * T))
    if p - h < 0 or p + hi + h + 1 > len(seg):
        return None
    template = seg[p - h:p + h + 1]
    shifts = np.arange(lo, hi + 1)
    windows = seg[p + shifts[:, None] + np.arange(-h, h + 1)[None, :]]
    norms = np.sqrt(np.sum(windows * windows, axis=1) * np.dot(template, template))
    with np.errstate(divide="ignore", invalid="ignore"):
        cc = np.where(norms > 0, windows @ template / norms, -1.0)
    q = p + int(shifts[np.argmax(cc)])
    w = max(1, int(round(0.1 * T)))
    a, b = max(1, q - w), min(len(seg) - 1, q + w + 1)
    if b <= a:
        return q
    local = seg[a:b]
    is_peak = (local >= seg[a - 1:b - 1]) & (local > seg[a + 1:b + 1])
    peaks = a + np.flatnonzero(is_peak)
    if len(peaks) == 0:
        return q
    return int(peaks[np.argmin(np.abs(peaks - q))])


def _voiced_regions(voiced: np.ndarray):
    edges = np.diff(np.concatenate([[0], voiced.astype(int), [0]]))
    return list(zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1) - 1))


def find_pulses(clip, f0: FrameTrack) -> list[tuple[np.ndarray, np.ndarray]]:
    """Locate one waveform peak per glottal cycle inside each voiced region.

    Returns a list of ``(positions_in_samples, amplitudes)`` per region, with
    sub-sample positions and heights from windowed-sinc interpolation.
    """
    sr = clip.sample_rate
    x = np.asarray(clip.samples, dtype=float)
    H = ms_to_samples(f0.frame_hop_ms, sr)
    L = ms_to_samples(f0.frame_len_ms, sr)
    values = f0.values
    voiced = ~np.isnan(values)
    out = []
    for first, last in _voiced_regions(voiced):
        start = first * H
        stop = min(len(x), last * H + L)
        centres = np.arange(first, last + 1) * H + L / 2.0
        periods = sr / values[first:last + 1]
        # octave outliers against the region median would derail the period guide
        med = np.median(periods)
        periods = np.where(np.abs(np.log2(periods / med)) > 0.5, med, periods)
        seg = x[start:stop]
        t0 = float(np.interp(start, centres, periods))
        if len(seg) < 3 * t0:
            continue
        # first pulse: highest peak of the second cycle, away from the region edge
        a = int(np.ceil(t0))
        p = a + int(np.argmax(seg[a:a + int(np.ceil(t0))]))
        pulses = [p]
        while True:
            q = _next_pulse(seg, p, float(np.interp(start + p, centres, periods)))
            if q is None or q <= p:
                break
            pulses.append(q)
            p = q
        refined = [_refine_peak(seg, i) for i in pulses]
        positions = start + np.array([r[0] for r in refined])
        amps = np.array([r[1] for r in refined])
        out.append((positions, amps))
    return out


def jitter_shimmer(clip, f0: FrameTrack) -> VoiceQuality:
    """Local jitter (relative and absolute) and local shimmer from pulse positions.

    jitter_local = mean|T_i - T_{i+1}| / mean T_i,
    shimmer_local = mean|A_i - A_{i+1}| / mean A_i. Pairs whose ratio exceeds
    the period (1.3) or amplitude (1.6) factor are skipped. Fewer than three
    periods leaves the measures undefined (reported as zeros).
    """
    sr = clip.sample_rate
    period_diffs, periods_used, amp_diffs, amps_used = [], [], [], []
    n_periods = 0
    for positions, amps in find_pulses(clip, f0):
        if len(positions) < 2:
            continue
        T = np.diff(positions) / sr
        A = amps[1:]
        n_periods += len(T)
        for i in range(len(T) - 1):
            if max(T[i], T[i + 1]) / min(T[i], T[i + 1]) <= MAX_PERIOD_RATIO:
                period_diffs.append(abs(T[i] - T[i + 1]))
                periods_used.extend((T[i], T[i + 1]))
            a_lo, a_hi = sorted((A[i], A[i + 1]))
            if a_lo > 0 and a_hi / a_lo <= MAX_AMPLITUDE_RATIO:
                amp_diffs.append(abs(A[i] - A[i + 1]))
                amps_used.extend((A[i], A[i + 1]))
    if n_periods < 3 or not period_diffs or not amp_diffs:
        return VoiceQuality(0.0, 0.0, 0.0, n_periods, False)
    jitter_abs = float(np.mean(period_diffs))
    return VoiceQuality(
        jitter_local=jitter_abs / float(np.mean(periods_used)),
        shimmer_local=float(np.mean(amp_diffs)) / float(np.mean(amps_used)),
        jitter_abs=jitter_abs,
        n_periods=n_periods,
        defined=True,
    )


@dataclass(frozen=True)
class PauseStats:
    total_dur_s: float
    speech_dur_s: float
    pause_count: int
    mean_pause_s: float
    pause_rate: float
    phonation_rate: float


def pause_features(clip, silence_dbfs: float = SILENCE_DBFS, min_pause_ms: float = MIN_PAUSE_MS) -> PauseStats:
    """Silence runs of at least ``min_pause_ms`` below ``silence_dbfs`` frame RMS.

    Runs touching the clip boundaries extend to the boundary and count as
    non-speech but not as pauses. Internal runs are pauses.
    """
    sr = clip.sample_rate
    n = len(clip.samples)
    L = ms_to_samples(PAUSE_FRAME_MS, sr)
    H = ms_to_samples(PAUSE_HOP_MS, sr)
    total = n / sr
    frames = frame_samples(clip.samples, L, H)
    rms = np.sqrt(np.mean(frames * frames, axis=1))
    silent = rms < 10.0 ** (silence_dbfs / 20.0)
    last = len(silent) - 1
    silence_total = 0.0
    pauses = []
    for i, j in _voiced_regions(silent):
        a = 0 if i == 0 else i * H
        b = n if j == last else j * H + L
        dur = (b - a) / sr
        if dur * 1000.0 < min_pause_ms:
            continue
        silence_total += dur
        if i != 0 and j != last:
            pauses.append(dur)
    speech = max(0.0, total - silence_total)
    return PauseStats(
        total_dur_s=total,
        speech_dur_s=speech,
        pause_count=len(pauses),
        mean_pause_s=float(np.mean(pauses)) if pauses else 0.0,
        pause_rate=len(pauses) / total,
        phonation_rate=speech / total,
    )
