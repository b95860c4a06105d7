"""Synthetic stand-in corpus: vowel-like recordings whose voice quality tracks a PHQ-8 label.

Not clinically meaningful. Each subject gets a latent value

    s = coupling * phq8 / 24 + (1 - coupling) * u,    u ~ U(0, 1)

that raises jitter, shimmer, breathiness and pause length and lowers F0.
With coupling 0 the audio carries no information about the label.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .audio import AudioClip, write_wav
from .evaluation.meta import TASKS, SampleMeta, write_meta
from .features.deep import DEEP_DIM, HOP_MS, WINDOW_S, window_count, write_deep_matrix
from .features.spectral import mel_filterbank
from .synthesis import VOWEL_FORMANTS, synth_vowel

LEAD_IN_S = 0.4
TAIL_S = 0.2
FADE_S = 0.02
# nominal recording length per task, seconds
TASK_DURATION = {
    "phoneme": 2.5,
    "phonemic_fluency": 3.0,
    "picture_description": 3.5,
    "semantic_fluency": 3.0,
    "prompted_narrative": 4.0,
}
N_MEL_DEEP = 128
# the "pretrained network" is a fixed random projection, independent of the corpus seed
PROJECTION_SEED = 20220901


@dataclass
class SyntheticCorpusSpec:
    n_subjects: int = 60
    samples_per_subject: int = 5
    tasks: tuple[str, ...] = TASKS
    severity_a: float = 1.4
    severity_b: float = 2.6
    coupling: float = 1.0
    noise_level: float = 0.0
    seed: int = 0
    sample_rate: int = 16000
    deep: bool = False

    def __post_init__(self):
        self.tasks = tuple(self.tasks)
        if self.n_subjects < 1 or self.samples_per_subject < 1:
            raise ValueError("counts must be >= 1")
        if not 0.0 <= self.coupling <= 1.0:
            raise ValueError("coupling must lie in [0, 1]")
        if self.noise_level < 0:
            raise ValueError("noise_level must be >= 0")
        unknown = set(self.tasks) - set(TASKS)
        if unknown or not self.tasks:
            raise ValueError(f"unknown tasks: {sorted(unknown)}")


def _fade(n, sr):
    k = min(int(FADE_S * sr), n // 2)
    env = np.ones(n)
    if k > 0:
        ramp = 0.5 - 0.5 * np.cos(np.pi * np.arange(k) / k)
        env[:k] = ramp
        env[n - k:] = ramp[::-1]
    return env


def synth_recording(latent: float, f0_base: float, task: str, duration: float, sr: int,
                    noise_level: float, rng) -> np.ndarray:
    """One recording: noise-only lead-in, voiced segments separated by pauses, short tail."""
    s = float(np.clip(latent, 0.0, 1.0))
    jitter = 0.003 + 0.02 * s
    shimmer = 0.02 + 0.12 * s
    breath = 0.03 + 0.35 * s
    f0 = f0_base * (1.0 - 0.18 * s)
    vowels = list(VOWEL_FORMANTS)
    parts = [np.zeros(int(LEAD_IN_S * sr))]
    body = duration - LEAD_IN_S - TAIL_S
    if task == "phoneme":
        # one sustained vowel
        segments = [(body, None)]
    else:
        segments = []
        left = body
        while left > 0.2:
            seg = min(left, rng.uniform(0.35, 0.7) * (1.0 - 0.3 * s))
            pause = rng.uniform(0.12, 0.3) + 0.45 * s
            segments.append((seg, pause))
            left -= seg + pause
    for seg, pause in segments:
        n = int(seg * sr)
        if n < int(0.05 * sr):
            continue
        contour = f0 * rng.uniform(0.95, 1.05)
        x = synth_vowel(contour, seg, sr, jitter=jitter, shimmer=shimmer,
                        vowel=vowels[rng.integers(len(vowels))],
                        amplitude=rng.uniform(0.4, 0.6), rng=rng)[:n]
        x = x + breath * np.std(x) * rng.standard_normal(n)
        parts.append(x * _fade(n, sr))
        if pause is not None:
            parts.append(np.zeros(int(pause * sr)))
    parts.append(np.zeros(int(TAIL_S * sr)))
    y = np.concatenate(parts)
    if noise_level > 0:
        speech_rms = np.sqrt(np.mean(y[y != 0] ** 2))
        y = y + noise_level * speech_rms * rng.standard_normal(len(y))
    peak = np.max(np.abs(y))
    if peak > 0.99:
        y *= 0.99 / peak
    return y


def projection_matrix(dim: int = DEEP_DIM, n_mel: int = N_MEL_DEEP) -> np.ndarray:
    rng = np.random.default_rng(PROJECTION_SEED)
    return rng.standard_normal((n_mel, dim)) / np.sqrt(n_mel)


def deep_activations(x: np.ndarray, sr: int, proj: np.ndarray) -> np.ndarray:
    """Windowed 4096-dim activations: per 1 s window, mean log-mel -> fixed projection -> ReLU."""
    n_fft = 512
    hop = int(0.010 * sr)
    fb = mel_filterbank(proj.shape[0], n_fft, sr)
    frames = np.lib.stride_tricks.sliding_window_view(x, n_fft)[::hop] if len(x) >= n_fft else np.zeros((1, n_fft))
    power = np.abs(np.fft.rfft(frames * np.hanning(n_fft), axis=1)) ** 2 / n_fft
    logmel = np.log(np.maximum(power @ fb.T, 1e-10))
    n_win = window_count(len(x) / sr)
    per_win = max(1, int(WINDOW_S * sr / hop))
    step = HOP_MS / 1000.0 * sr / hop
    rows = []
    for w in range(n_win):
        a = int(round(w * step))
        chunk = logmel[a:a + per_win]
        v = chunk.mean(axis=0)
        v = (v - v.mean()) / (v.std() + 1e-9)
        rows.append(np.maximum(v @ proj, 0.0))
    return np.array(rows)


def generate_corpus(spec: SyntheticCorpusSpec, out_dir) -> list[SampleMeta]:
    """Write WAVs (``audio/``), ``metadata.csv`` and optionally ``deep/<id>.csv`` under ``out_dir``."""
    rng = np.random.default_rng(spec.seed)
    audio_dir = os.path.join(out_dir, "audio")
    os.makedirs(audio_dir, exist_ok=True)
    deep_dir = os.path.join(out_dir, "deep")
    proj = None
    if spec.deep:
        os.makedirs(deep_dir, exist_ok=True)
        proj = projection_matrix()
    meta = []
    for subj in range(spec.n_subjects):
        gender = "male" if subj % 2 == 0 else "female"
        phq = int(np.clip(np.rint(24 * rng.beta(spec.severity_a, spec.severity_b)), 0, 24))
        u = rng.uniform()
        latent = spec.coupling * phq / 24.0 + (1.0 - spec.coupling) * u
        f0_base = (118.0 if gender == "male" else 205.0) * rng.uniform(0.93, 1.07)
        sid = f"S{subj:03d}"
        for k in range(spec.samples_per_subject):
            task = spec.tasks[k % len(spec.tasks)]
            rep = k // len(spec.tasks)
            sample_id = f"{sid}_{task}" + (f"_{rep}" if rep else "")
            duration = TASK_DURATION[task] * rng.uniform(0.9, 1.1)
            x = synth_recording(latent, f0_base, task, duration, spec.sample_rate,
                                spec.noise_level, rng)
            clip = AudioClip(x, spec.sample_rate, sample_id)
            write_wav(os.path.join(audio_dir, f"{sample_id}.wav"), clip)
            if proj is not None:
                write_deep_matrix(os.path.join(deep_dir, f"{sample_id}.csv"),
                                  deep_activations(x, spec.sample_rate, proj))
            meta.append(SampleMeta(sample_id, sid, gender, task, phq, len(x) / spec.sample_rate))
    write_meta(os.path.join(out_dir, "metadata.csv"), meta)
    return meta
