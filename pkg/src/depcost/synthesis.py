"""Deterministic vowel-like signal synthesis with explicit per-cycle periods and amplitudes."""

from __future__ import annotations

import numpy as np
from scipy.signal import lfilter

# (F1, F2, F3) in Hz
VOWEL_FORMANTS = {
    "a": (730.0, 1090.0, 2440.0),
    "i": (270.0, 2290.0, 3010.0),
    "u": (300.0, 870.0, 2240.0),
    "e": (530.0, 1840.0, 2480.0),
    "o": (570.0, 840.0, 2410.0),
}


def cycle_source(periods, amplitudes, sample_rate: int, n_samples: int | None = None,
                 rolloff: float = 2.0) -> np.ndarray:
    """Harmonic source whose i-th cycle lasts ``periods[i]`` seconds.

    Each cycle starts at a waveform maximum, so peak-to-peak spacing equals
    the cycle period. The amplitude envelope passes through
    ``amplitudes[i]`` at the start of cycle i.
    """
    periods = np.asarray(periods, dtype=float)
    amplitudes = np.asarray(amplitudes, dtype=float)
    bounds = np.concatenate([[0.0], np.cumsum(periods)])
    if n_samples is None:
        n_samples = int(np.floor(bounds[-1] * sample_rate))
    t = np.arange(n_samples) / sample_rate
    phase = 2.0 * np.pi * np.interp(t, bounds, np.arange(len(bounds), dtype=float))
    f0_max = 1.0 / periods.min()
    n_harm = max(1, int(0.45 * sample_rate / f0_max))
    k = np.arange(1, n_harm + 1)
    weights = 1.0 / k ** rolloff
    wave = np.zeros(n_samples)
    for kk, wk in zip(k, weights):
        wave += wk * np.cos(kk * phase)
    wave /= weights.sum()
    envelope = np.interp(t, bounds[:-1], amplitudes)
    return wave * envelope


def formant_filter(x: np.ndarray, sample_rate: int, formants=(730.0, 1090.0, 2440.0),
                   bandwidths=(90.0, 110.0, 170.0)) -> np.ndarray:
    """Cascade of second-order resonators normalized to unit DC gain."""
    y = np.asarray(x, dtype=float)
    for f, bw in zip(formants, bandwidths):
        if f >= sample_rate / 2:
            continue
        r = np.exp(-np.pi * bw / sample_rate)
        theta = 2.0 * np.pi * f / sample_rate
        a = [1.0, -2.0 * r * np.cos(theta), r * r]
        y = lfilter([sum(a)], a, y)
    return y


def perturbed_periods(f0: float, duration: float, jitter: float = 0.0, rng=None) -> np.ndarray:
    """Cycle periods covering ``duration`` with uniform relative perturbation +-``jitter``."""
    rng = rng if rng is not None else np.random.default_rng(0)
    t0 = 1.0 / f0
    n = int(np.ceil(duration / t0)) + 2
    return t0 * (1.0 + rng.uniform(-jitter, jitter, size=n))


def synth_vowel(f0: float, duration: float, sample_rate: int = 16000, jitter: float = 0.0,
                shimmer: float = 0.0, vowel: str | None = "a", amplitude: float = 0.5,
                rng=None) -> np.ndarray:
    """Sustained vowel with uniform period jitter and amplitude shimmer (both relative)."""
    rng = rng if rng is not None else np.random.default_rng(0)
    periods = perturbed_periods(f0, duration, jitter, rng)
    amps = 1.0 + rng.uniform(-shimmer, shimmer, size=len(periods))
    n = int(round(duration * sample_rate))
    x = cycle_source(periods, amps, sample_rate, n)
    if vowel is not None:
        x = formant_filter(x, sample_rate, VOWEL_FORMANTS[vowel])
    peak = np.max(np.abs(x))
    return amplitude * x / peak if peak > 0 else x
